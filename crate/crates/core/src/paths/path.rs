use serde::Serialize;

use crate::error::{Error, Result};

/// A piecewise-constant right-continuous trajectory on `[0, horizon]`.
///
/// `w(s)` is the state after the last jump at or before `s`; beyond the
/// horizon the final state is held.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CadlagPath {
    x0: f64,
    jump_times: Vec<f64>,
    states: Vec<f64>,
    horizon: f64,
}

impl CadlagPath {
    /// ```
    /// let w = ctruelle::CadlagPath::new(0.2, vec![1.0], vec![0.7], 3.0)?;
    /// assert_eq!(w.eval(0.999), 0.2);
    /// assert_eq!(w.eval(1.0), 0.7);
    /// # Ok::<(), ctruelle::Error>(())
    /// ```
    pub fn new(x0: f64, jump_times: Vec<f64>, states: Vec<f64>, horizon: f64) -> Result<Self> {
        if jump_times.len() != states.len() {
            return Err(Error::InvalidParameter("one state per jump time is required".into()));
        }
        if !(horizon > 0.0) {
            return Err(Error::InvalidParameter(format!("horizon must be positive, got {horizon}")));
        }
        let mut prev = 0.0;
        for &t in &jump_times {
            if !(t > prev) || t > horizon {
                return Err(Error::InvalidParameter(format!(
                    "jump times must be strictly increasing in (0, horizon], got {t}"
                )));
            }
            prev = t;
        }
        Ok(Self {
            x0,
            jump_times,
            states,
            horizon,
        })
    }

    pub fn constant(x: f64, horizon: f64) -> Result<Self> {
        Self::new(x, vec![], vec![], horizon)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn jump_count(&self) -> usize {
        self.jump_times.len()
    }

    pub fn final_state(&self) -> f64 {
        self.states.last().copied().unwrap_or(self.x0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = self.jump_times.partition_point(|&t| t <= s);
        if k == 0 {
            self.x0
        } else {
            self.states[k - 1]
        }
    }

    /// `(start, end, state)` for each constant piece on `[0, horizon]`.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let starts = std::iter::once(0.0).chain(self.jump_times.iter().copied());
        let ends = self.jump_times.iter().copied().chain(std::iter::once(self.horizon));
        let values = std::iter::once(self.x0).chain(self.states.iter().copied());
        starts.zip(ends).zip(values).map(|((a, b), v)| (a, b, v))
    }

    /// Pairs `(pre-jump state, post-jump state)` for every jump.
    pub fn transitions(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let before = std::iter::once(self.x0).chain(self.states.iter().copied());
        before.zip(self.states.iter().copied())
    }

    /// `∫_0^horizon F(w(s)) ds` for a function of the state.
    pub fn time_integral(&self, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let mut total = 0.0;
        for (a, b, v) in self.segments() {
            if b > a {
                total += (b - a) * f(v)?;
            }
        }
        Ok(total)
    }

    /// Fraction of `[0, horizon]` spent in each of `bins` equal subintervals of `[0, 1)`.
    pub fn occupation(&self, bins: usize) -> Vec<f64> {
        let mut out = vec![0.0; bins];
        for (a, b, v) in self.segments() {
            let k = ((v * bins as f64).floor().max(0.0) as usize).min(bins - 1);
            out[k] += b - a;
        }
        out.iter_mut().for_each(|o| *o /= self.horizon);
        out
    }
}

/// A trajectory on `(−∞, 0]` with finitely many jumps, evaluated
/// left-continuously: `w(s)` is the state after the last jump strictly before `s`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PastPath {
    initial: f64,
    jump_times: Vec<f64>,
    states: Vec<f64>,
}

impl PastPath {
    /// `initial` is the state before the first jump; jump times must be
    /// strictly increasing and negative.
    pub fn new(initial: f64, jump_times: Vec<f64>, states: Vec<f64>) -> Result<Self> {
        if jump_times.len() != states.len() {
            return Err(Error::InvalidParameter("one state per jump time is required".into()));
        }
        if jump_times.windows(2).any(|w| !(w[1] > w[0])) || jump_times.iter().any(|&t| !(t < 0.0)) {
            return Err(Error::InvalidParameter(
                "past jump times must be strictly increasing and negative".into(),
            ));
        }
        Ok(Self {
            initial,
            jump_times,
            states,
        })
    }

    pub fn constant(x: f64) -> Self {
        Self {
            initial: x,
            jump_times: vec![],
            states: vec![],
        }
    }

    pub fn jump_times(&self) -> &[f64] {
        &self.jump_times
    }

    pub fn states(&self) -> &[f64] {
        &self.states
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = self.jump_times.partition_point(|&t| t < s);
        if k == 0 {
            self.initial
        } else {
            self.states[k - 1]
        }
    }

    /// Right limit `lim_{r↓s} w(r)`.
    fn eval_right(&self, s: f64) -> f64 {
        let k = self.jump_times.partition_point(|&t| t <= s);
        if k == 0 {
            self.initial
        } else {
            self.states[k - 1]
        }
    }
}

/// The concatenation `s ↦ w1(s − t)` for `s < t`, `w2(s − t)` for `s ≥ t`, on
/// `[0, t + horizon(w2)]`.
///
/// The result is the right-continuous version, which differs from the
/// pointwise formula only at the jump instants of `w1`.
///
/// ```
/// use ctruelle::{splice, CadlagPath, PastPath};
/// let w = splice(&PastPath::constant(0.1), &CadlagPath::constant(0.9, 2.0)?, 1.0)?;
/// assert_eq!((w.eval(0.5), w.eval(1.0), w.horizon()), (0.1, 0.9, 3.0));
/// # Ok::<(), ctruelle::Error>(())
/// ```
pub fn splice(w1: &PastPath, w2: &CadlagPath, t: f64) -> Result<CadlagPath> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("splice time must be >= 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(w2.clone());
    }
    let x0 = w1.eval_right(-t);
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (&tau, &x) in w1.jump_times.iter().zip(w1.states.iter()) {
        if tau > -t {
            times.push(tau + t);
            states.push(x);
        }
    }
    times.push(t);
    states.push(w2.x0());
    for (&tau, &x) in w2.jump_times().iter().zip(w2.states().iter()) {
        times.push(tau + t);
        states.push(x);
    }
    CadlagPath::new(x0, times, states, t + w2.horizon())
}

/// A strictly increasing piecewise-linear bijection of `[0, ∞)` with `λ(0) = 0`,
/// given by its breakpoints and continued with `final_slope` after the last one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeChange {
    knots: Vec<(f64, f64)>,
    final_slope: f64,
}

impl TimeChange {
    pub fn identity() -> Self {
        Self {
            knots: vec![(0.0, 0.0)],
            final_slope: 1.0,
        }
    }

    /// The map through `(0, 0)` and the given points, with slope one after the last.
    pub fn through(points: &[(f64, f64)]) -> Result<Self> {
        let mut knots = vec![(0.0, 0.0)];
        for &(s, u) in points {
            let &(ps, pu) = knots.last().expect("nonempty");
            if !(s > ps && u > pu) {
                return Err(Error::InvalidParameter("time change must be strictly increasing".into()));
            }
            knots.push((s, u));
        }
        Ok(Self {
            knots,
            final_slope: 1.0,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.final_slope == 1.0 && self.knots.iter().all(|&(s, u)| s == u)
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = self.knots.partition_point(|&(a, _)| a <= s);
        let (s0, u0) = self.knots[k.max(1) - 1];
        match self.knots.get(k) {
            Some(&(s1, u1)) => u0 + (s - s0) * (u1 - u0) / (s1 - s0),
            None => u0 + (s - s0) * self.final_slope,
        }
    }

    pub fn inverse(&self) -> TimeChange {
        TimeChange {
            knots: self.knots.iter().map(|&(s, u)| (u, s)).collect(),
            final_slope: 1.0 / self.final_slope,
        }
    }

    pub fn inverse_eval(&self, u: f64) -> f64 {
        self.inverse().eval(u)
    }

    /// `γ(λ) = max |log slope|`.
    pub fn gamma(&self) -> f64 {
        let mut g = self.final_slope.ln().abs();
        for w in self.knots.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            g = g.max(slope.ln().abs());
        }
        g
    }
}
