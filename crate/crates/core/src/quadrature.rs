//! Continuum quadrature used for checks that must not inherit the grid's
//! discretisation error: composite Gauss–Legendre on the grid cells and a
//! local polynomial interpolant of grid functions.
//!
//! Cells are aligned with grid nodes, so an integrand that is smooth on each
//! cell (the polynomial kernel has its kinks at nodes) is integrated to
//! near machine precision.

const GL_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];

const GL_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_3,
    0.222_381_034_453_374_5,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// Integral of `f` over `[0, 1]`, split into the `n` cells `[k/n, (k+1)/n]`
/// with eight Gauss–Legendre points per cell.
pub fn integrate_cells(n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = 1.0 / n as f64;
    let mut total = 0.0;
    for k in 0..n {
        let left = k as f64 * h;
        let mut cell = 0.0;
        for (xi, w) in GL_NODES.iter().zip(GL_WEIGHTS.iter()) {
            cell += w * f(left + 0.5 * h * (1.0 + xi));
        }
        total += 0.5 * h * cell;
    }
    total
}

/// Piecewise degree-7 Lagrange interpolant of values at the nodes `k/n`,
/// `k = 0..n-1`, on `[0, 1]`. It is not periodic: the last cell
/// `[(n-1)/n, 1]` is covered by one-sided extrapolation, which keeps
/// non-periodic polynomials exact.
#[derive(Clone, Debug)]
pub struct LocalInterpolant {
    values: Vec<f64>,
    width: usize,
}

impl LocalInterpolant {
    pub fn new(values: &[f64]) -> Self {
        Self {
            values: values.to_vec(),
            width: values.len().min(8),
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.values.len();
        let h = 1.0 / n as f64;
        let cell = ((y / h).floor().max(0.0) as usize).min(n - 1);
        let start = cell
            .saturating_sub(self.width / 2 - 1)
            .min(n - self.width);
        let mut acc = 0.0;
        for a in start..start + self.width {
            let xa = a as f64 * h;
            let mut basis = 1.0;
            for b in start..start + self.width {
                if b != a {
                    let xb = b as f64 * h;
                    basis *= (y - xb) / (xa - xb);
                }
            }
            acc += basis * self.values[a];
        }
        acc
    }
}
