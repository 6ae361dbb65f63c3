use serde::Serialize;

use super::path::{splice, CadlagPath, PastPath, TimeChange};
use crate::error::{Error, Result};

/// State metric `q(a, b) = min(|a − b|, 1)`.
pub fn state_metric(a: f64, b: f64) -> f64 {
    (a - b).abs().min(1.0)
}

/// Upper bound on the Skorokhod distance and the candidate that attains it.
#[derive(Clone, Debug, Serialize)]
pub struct SkorokhodBound {
    pub value: f64,
    pub candidate: usize,
    pub gamma: f64,
    pub integral: f64,
}

fn merge_close(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(|a, b| a.total_cmp(b));
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&q) if p - q <= 1e-12 * q.abs().max(1.0) => {}
            _ => out.push(p),
        }
    }
    out
}

/// `sup_s q(x(s ∧ u), y(λ(s) ∧ u))`. The map `s ↦ (x(s ∧ u), y(λ(s) ∧ u))` is
/// piecewise constant with breaks in a finite skeleton; it is sampled once
/// inside every piece, so rounding at the breaks cannot pair values from
/// different pieces.
fn sup_at(x: &CadlagPath, y: &CadlagPath, lambda: &TimeChange, inverse: &TimeChange, u: f64) -> f64 {
    let mut skeleton = vec![0.0, u, inverse.eval(u)];
    skeleton.extend(x.jump_times().iter().copied().filter(|&a| a < u));
    skeleton.extend(
        y.jump_times()
            .iter()
            .copied()
            .filter(|&b| b < u)
            .map(|b| inverse.eval(b)),
    );
    let skeleton = merge_close(skeleton);
    let pair = |s: f64| state_metric(x.eval(s.min(u)), y.eval(lambda.eval(s).min(u)));
    let mut best = 0.0_f64;
    for w in skeleton.windows(2) {
        best = best.max(pair(0.5 * (w[0] + w[1])));
    }
    best.max(pair(skeleton.last().copied().unwrap_or(0.0) + 1.0))
}

/// `∫_0^∞ e^{−u} sup_s q(x(s ∧ u), y(λ(s) ∧ u)) du`, evaluated exactly.
///
/// The integrand is constant between consecutive points of the set formed by
/// the jump times of both paths and their images under `λ` and `λ⁻¹`, so the
/// integral is a finite sum of `d_k (e^{−u_k} − e^{−u_{k+1}})`.
pub fn skorokhod_integral(x: &CadlagPath, y: &CadlagPath, lambda: &TimeChange) -> f64 {
    let inverse = lambda.inverse();
    let mut breaks = vec![0.0];
    breaks.extend(x.jump_times().iter().copied());
    breaks.extend(y.jump_times().iter().copied());
    breaks.extend(x.jump_times().iter().map(|&a| lambda.eval(a)));
    breaks.extend(y.jump_times().iter().map(|&b| inverse.eval(b)));
    let breaks = merge_close(breaks);
    let mut total = 0.0;
    for (k, &lo) in breaks.iter().enumerate() {
        let (mid, mass) = match breaks.get(k + 1) {
            Some(&hi) => (0.5 * (lo + hi), (-lo).exp() - (-hi).exp()),
            None => (lo + 1.0, (-lo).exp()),
        };
        total += mass * sup_at(x, y, lambda, &inverse, mid);
    }
    total
}

/// `min over candidates of max(γ(λ), ∫ e^{−u} d(x, y, λ, u) du)`, an upper bound on
/// the Skorokhod distance. The candidate set must contain the identity.
///
/// ```
/// use ctruelle::{skorokhod_upper, CadlagPath, TimeChange};
/// let x = CadlagPath::constant(0.2, 5.0)?;
/// let y = CadlagPath::constant(0.7, 5.0)?;
/// let d = skorokhod_upper(&x, &y, &[TimeChange::identity()])?;
/// assert!((d.value - 0.5).abs() < 1e-15);
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn skorokhod_upper(x: &CadlagPath, y: &CadlagPath, candidates: &[TimeChange]) -> Result<SkorokhodBound> {
    if !candidates.iter().any(TimeChange::is_identity) {
        return Err(Error::InvalidParameter("candidate set must contain the identity".into()));
    }
    let mut best: Option<SkorokhodBound> = None;
    for (k, lambda) in candidates.iter().enumerate() {
        let gamma = lambda.gamma();
        if best.as_ref().is_some_and(|b| gamma >= b.value) {
            continue;
        }
        let integral = skorokhod_integral(x, y, lambda);
        let value = gamma.max(integral);
        if best.as_ref().is_none_or(|b| value < b.value) {
            best = Some(SkorokhodBound {
                value,
                candidate: k,
                gamma,
                integral,
            });
        }
    }
    Ok(best.expect("identity candidate is always evaluated"))
}

/// Identity plus piecewise-linear time changes that align jump times of `x`
/// with jump times of `y`.
///
/// For each offset `k` with `|k| ≤ window`, the map through all pairs
/// `(a_i, b_{i+k})`; then single-pair maps `(a_i, b_j)` with `|i − j| ≤ window`,
/// closest pairs first; at most `cap` candidates in total. Swapping `x` and `y`
/// produces the inverse maps.
pub fn candidate_time_changes(x: &CadlagPath, y: &CadlagPath, window: usize, cap: usize) -> Vec<TimeChange> {
    let a = x.jump_times();
    let b = y.jump_times();
    let mut out = vec![TimeChange::identity()];
    let w = window as isize;
    let mut offsets: Vec<isize> = (-w..=w).collect();
    offsets.sort_by_key(|k| k.abs());
    for k in offsets {
        let pairs: Vec<(f64, f64)> = (0..a.len() as isize)
            .filter_map(|i| {
                let j = i + k;
                (j >= 0 && (j as usize) < b.len()).then(|| (a[i as usize], b[j as usize]))
            })
            .collect();
        if let (false, Ok(tc)) = (pairs.is_empty(), TimeChange::through(&pairs)) {
            push_unique(&mut out, tc, cap);
        }
    }
    let mut singles: Vec<(f64, f64)> = Vec::new();
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            if i.abs_diff(j) <= window {
                singles.push((ai, bj));
            }
        }
    }
    singles.sort_by(|p, q| {
        let key = |&(s, t): &(f64, f64)| ((s - t).abs(), s + t);
        key(p).partial_cmp(&key(q)).unwrap_or(std::cmp::Ordering::Equal)
    });
    for pair in singles {
        if let Ok(tc) = TimeChange::through(&[pair]) {
            push_unique(&mut out, tc, cap);
        }
    }
    out.truncate(cap);
    out
}

fn push_unique(out: &mut Vec<TimeChange>, tc: TimeChange, cap: usize) {
    if out.len() < cap && !out.contains(&tc) {
        out.push(tc);
    }
}

/// Result of [`expansiveness_check`].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpansivenessReport {
    pub t: f64,
    pub bound: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Distance bound between `w1|ᵗw2` and `w1|ᵗw2'` with the identity time change,
/// compared against `e^{−t}`.
pub fn expansiveness_check(w1: &PastPath, w2: &CadlagPath, w2p: &CadlagPath, t: f64) -> Result<ExpansivenessReport> {
    let a = splice(w1, w2, t)?;
    let b = splice(w1, w2p, t)?;
    let bound = skorokhod_upper(&a, &b, &[TimeChange::identity()])?.value;
    let threshold = (-t).exp();
    Ok(ExpansivenessReport {
        t,
        bound,
        threshold,
        pass: bound <= threshold + 1e-12,
    })
}
