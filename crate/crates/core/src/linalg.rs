//! Dense linear algebra used by the semigroup and spectral code: LU solves,
//! the Padé-13 matrix exponential, and a Perron power iteration.

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Array2<f64>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn new(a: &Array2<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::InvalidParameter("LU needs a square matrix".into()));
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = lu.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[[i, k]].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pivot <= scale * 1e-300 || pivot == 0.0 {
                return Err(Error::Singular);
            }
            if p != k {
                for j in 0..n {
                    lu.swap([k, j], [p, j]);
                }
                perm.swap(k, p);
            }
            let d = lu[[k, k]];
            for i in k + 1..n {
                let l = lu[[i, k]] / d;
                lu[[i, k]] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[[i, j]] -= l * lu[[k, j]];
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = self.lu.nrows();
        let mut x: Array1<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[[i, j]] * x[j];
            }
            x[i] = s / self.lu[[i, i]];
        }
        x
    }

    pub fn solve_matrix(&self, b: &Array2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros(b.raw_dim());
        for (j, col) in b.axis_iter(Axis(1)).enumerate() {
            out.column_mut(j).assign(&self.solve(&col.to_owned()));
        }
        out
    }
}

/// Solves `a x = b`.
pub fn solve(a: &Array2<f64>, b: &Array1<f64>) -> Result<Array1<f64>> {
    Ok(Lu::new(a)?.solve(b))
}

/// Entrywise maximum absolute value.
pub fn max_abs(a: &Array2<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn norm1(a: &Array2<f64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with the degree-13 Padé
/// approximant (Higham 2005).
pub fn expm(a: &Array2<f64>) -> Result<Array2<f64>> {
    let n = a.nrows();
    let theta13 = 5.371920351148152;
    let norm = norm1(a);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = a / 2f64.powi(s);
    let b = &PADE13;
    let ident = Array2::<f64>::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let u_inner = &a6 * b[13] + &a4 * b[11] + &a2 * b[9];
    let u_tail = &a6 * b[7] + &a4 * b[5] + &a2 * b[3] + &ident * b[1];
    let u = a.dot(&(a6.dot(&u_inner) + u_tail));
    let v_inner = &a6 * b[12] + &a4 * b[10] + &a2 * b[8];
    let v = a6.dot(&v_inner) + &a6 * b[6] + &a4 * b[4] + &a2 * b[2] + &ident * b[0];
    let p = &v + &u;
    let q = &v - &u;
    let mut r = Lu::new(&q)?.solve_matrix(&p);
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}

/// Pairwise (cascade) summation. Summing in a fixed tree order keeps
/// ensemble averages reproducible independent of how the terms were produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Result of [`perron_iteration`].
#[derive(Clone, Debug)]
pub struct PerronVector {
    /// Dominant eigenvalue, the midpoint of the final Collatz–Wielandt bracket.
    pub value: f64,
    /// Eigenvector scaled to unit maximum.
    pub vector: Array1<f64>,
    pub iterations: usize,
    /// Width of the final Collatz–Wielandt bracket.
    pub bracket: f64,
}

/// Power iteration for the Perron root of a nonnegative irreducible operator.
///
/// Stops once the Collatz–Wielandt bracket `max_i (Bv)_i / v_i - min_i (Bv)_i / v_i`
/// falls below `tol * max(1, |rho|)`. The bracket encloses the Perron root,
/// so this is a certified stopping rule rather than a stagnation test.
pub fn perron_iteration(
    apply: impl Fn(&Array1<f64>) -> Array1<f64>,
    start: Array1<f64>,
    tol: f64,
    max_iter: usize,
    what: &'static str,
) -> Result<PerronVector> {
    let mut v = start;
    let mut bracket = f64::INFINITY;
    for it in 1..=max_iter {
        let w = apply(&v);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (a, b) in w.iter().zip(v.iter()) {
            let ratio = a / b;
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        let scale = w.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        if !scale.is_finite() || scale == 0.0 {
            return Err(Error::NonConvergence {
                what,
                iterations: it,
                residual: f64::NAN,
            });
        }
        if lo.is_finite() && hi.is_finite() {
            bracket = hi - lo;
            let rho = 0.5 * (hi + lo);
            if bracket <= tol * rho.abs().max(1.0) {
                return Ok(PerronVector {
                    value: rho,
                    vector: w / scale,
                    iterations: it,
                    bracket,
                });
            }
        }
        v = w / scale;
    }
    Err(Error::NonConvergence {
        what,
        iterations: max_iter,
        residual: bracket,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn lu_solves_small_system() {
        let a = array![[0.0, 2.0, 1.0], [1.0, 1.0, 0.0], [3.0, 0.0, 1.0]];
        let x = array![1.0, -2.0, 0.5];
        let b = a.dot(&x);
        let y = solve(&a, &b).unwrap();
        assert!((&y - &x).iter().all(|e| e.abs() < 1e-14));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let a = array![[1.0, 2.0], [2.0, 4.0]];
        assert!(matches!(Lu::new(&a), Err(Error::Singular)));
    }

    #[test]
    fn expm_of_diagonal_and_rotation() {
        let d = array![[1.0, 0.0], [0.0, -2.0]];
        let e = expm(&d).unwrap();
        assert!((e[[0, 0]] - 1f64.exp()).abs() < 1e-14);
        assert!((e[[1, 1]] - (-2f64).exp()).abs() < 1e-15);
        // A large rotation generator forces several squarings.
        let t = 40.0;
        let r = array![[0.0, -t], [t, 0.0]];
        let e = expm(&r).unwrap();
        assert!((e[[0, 0]] - t.cos()).abs() < 1e-11);
        assert!((e[[1, 0]] - t.sin()).abs() < 1e-11);
    }

    #[test]
    fn expm_nilpotent_is_exact_polynomial() {
        let n = array![[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]];
        let e = expm(&n).unwrap();
        assert!((e[[0, 2]] - 0.5).abs() < 1e-15);
        assert!((e[[0, 1]] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn perron_of_positive_matrix() {
        let m = array![[2.0, 1.0], [1.0, 2.0]];
        let p = perron_iteration(|v| m.dot(v), array![1.0, 0.5], 1e-14, 1000, "test").unwrap();
        assert!((p.value - 3.0).abs() < 1e-12);
        assert!((p.vector[0] - p.vector[1]).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_matches_naive_for_integers() {
        let xs: Vec<f64> = (1..=1000).map(|k| k as f64).collect();
        assert_eq!(pairwise_sum(&xs), 500500.0);
    }
}
