use std::f64::consts::TAU;

use ctruelle::paths::{
    ensemble_estimate, path_rng, simulate_indexed, skorokhod_integral, state_metric, StateSpace,
};
use ctruelle::{
    admissible_model, candidate_time_changes, entropy_production_rate, expansiveness_check,
    feynman_kac_operator, mc_entropy_production, mc_feynman_kac, path_log_rn, principal_eigenpair,
    simulate, skorokhod_upper, splice, AprioriDynamics, CadlagPath, EigenOptions, Error, Field,
    GibbsModel, Grid, GridDynamics, GridFunction, InitialLaw, JumpDynamics, KernelModel, Nystrom,
    PastPath, PowerOptions, Result, TimeChange,
};

/// Rate one with jump density `1 − a sin 2π(y − x)`, the reversal of the sine kernel.
struct ReversedSine(f64);

impl JumpDynamics for ReversedSine {
    fn state_space(&self) -> StateSpace {
        StateSpace::Continuum
    }
    fn rate(&self, _x: f64) -> Result<f64> {
        Ok(1.0)
    }
    fn density(&self, x: f64, y: f64) -> Result<f64> {
        Ok(1.0 - self.0 * (TAU * (y - x)).sin())
    }
    fn density_bound(&self, _x: f64) -> Result<f64> {
        Ok(1.0 + self.0)
    }
}

/// A jump density that is zero everywhere, so rejection sampling never accepts.
struct Dead;

impl JumpDynamics for Dead {
    fn state_space(&self) -> StateSpace {
        StateSpace::Continuum
    }
    fn rate(&self, _x: f64) -> Result<f64> {
        Ok(1.0)
    }
    fn density(&self, _x: f64, _y: f64) -> Result<f64> {
        Ok(0.0)
    }
    fn density_bound(&self, _x: f64) -> Result<f64> {
        Ok(1.0)
    }
}

#[test]
fn path_evaluation_is_right_continuous() {
    let w = CadlagPath::new(0.1, vec![0.5, 1.5], vec![0.4, 0.9], 2.0).unwrap();
    assert_eq!(w.eval(0.0), 0.1);
    assert_eq!(w.eval(0.5), 0.4);
    assert_eq!(w.eval(0.5 + 1e-12), 0.4);
    assert_eq!(w.eval(0.5 - 1e-12), 0.1);
    assert_eq!(w.eval(1.5), 0.9);
    assert_eq!(w.eval(7.0), 0.9);
    assert_eq!(w.final_state(), 0.9);
    let integral = w.time_integral(Ok).unwrap();
    assert!((integral - (0.5 * 0.1 + 1.0 * 0.4 + 0.5 * 0.9)).abs() < 1e-15);
    assert!(CadlagPath::new(0.1, vec![0.5, 0.5], vec![0.4, 0.9], 2.0).is_err());
    assert!(CadlagPath::new(0.1, vec![0.0], vec![0.4], 2.0).is_err());
    assert!(CadlagPath::new(0.1, vec![2.5], vec![0.4], 2.0).is_err());
    assert!(CadlagPath::new(0.1, vec![], vec![], 0.0).is_err());
}

#[test]
fn past_paths_are_left_continuous() {
    let w = PastPath::new(0.2, vec![-2.0, -1.0], vec![0.5, 0.8]).unwrap();
    assert_eq!(w.eval(-3.0), 0.2);
    assert_eq!(w.eval(-2.0), 0.2);
    assert_eq!(w.eval(-1.5), 0.5);
    assert_eq!(w.eval(0.0), 0.8);
    assert!(PastPath::new(0.2, vec![-1.0, -2.0], vec![0.5, 0.8]).is_err());
    assert!(PastPath::new(0.2, vec![0.0], vec![0.5]).is_err());
}

#[test]
fn splice_examples() {
    let w2 = CadlagPath::new(0.3, vec![0.7], vec![0.6], 2.0).unwrap();
    let w1 = PastPath::new(0.9, vec![-0.4], vec![0.1]).unwrap();
    assert_eq!(splice(&w1, &w2, 0.0).unwrap(), w2);

    let step = splice(&PastPath::constant(0.25), &CadlagPath::constant(0.75, 3.0).unwrap(), 1.0).unwrap();
    assert_eq!(step.eval(0.0), 0.25);
    assert_eq!(step.eval(0.999), 0.25);
    assert_eq!(step.eval(1.0), 0.75);
    assert_eq!(step.eval(10.0), 0.75);
    assert_eq!(step.horizon(), 4.0);

    let s = splice(&w1, &w2, 1.0).unwrap();
    assert_eq!(s.eval(0.0), 0.9);
    assert_eq!(s.eval(0.6), 0.1);
    assert_eq!(s.eval(1.0), 0.3);
    assert_eq!(s.eval(1.7), 0.6);
    assert!(splice(&w1, &w2, -1.0).is_err());
}

#[test]
fn splice_at_a_past_jump_uses_the_right_limit() {
    let w1 = PastPath::new(0.9, vec![-1.0], vec![0.1]).unwrap();
    let s = splice(&w1, &CadlagPath::constant(0.5, 1.0).unwrap(), 1.0).unwrap();
    assert_eq!(s.eval(0.0), 0.1);
}

#[test]
fn splices_share_their_prefix() {
    let model = KernelModel::cosine();
    let dynamics = AprioriDynamics::new(&model);
    let w1 = PastPath::new(0.4, vec![-3.0, -1.2, -0.3], vec![0.8, 0.05, 0.6]).unwrap();
    for k in 0..20 {
        let w2 = simulate_indexed(&dynamics, &InitialLaw::Uniform, 3.0, 1, k).unwrap();
        let w2p = simulate_indexed(&dynamics, &InitialLaw::Uniform, 3.0, 2, k).unwrap();
        let a = splice(&w1, &w2, 2.0).unwrap();
        let b = splice(&w1, &w2p, 2.0).unwrap();
        for i in 0..200 {
            let s = 2.0 * i as f64 / 200.0;
            assert_eq!(a.eval(s), b.eval(s));
        }
    }
}

#[test]
fn time_changes() {
    let id = TimeChange::identity();
    assert!(id.is_identity());
    assert_eq!(id.gamma(), 0.0);
    let l = TimeChange::through(&[(1.0, 1.1), (2.0, 2.0)]).unwrap();
    assert!((l.eval(0.5) - 0.55).abs() < 1e-15);
    assert!((l.eval(1.5) - 1.55).abs() < 1e-15);
    assert!((l.eval(5.0) - 5.0).abs() < 1e-15);
    assert!((l.inverse_eval(l.eval(1.7)) - 1.7).abs() < 1e-15);
    assert!((l.gamma() - 0.9f64.ln().abs().max(1.1f64.ln())).abs() < 1e-15);
    assert!((l.inverse().gamma() - l.gamma()).abs() < 1e-15);
    assert!(TimeChange::through(&[(1.0, 1.0), (0.5, 2.0)]).is_err());
}

#[test]
fn skorokhod_examples() {
    let a = CadlagPath::constant(0.2, 4.0).unwrap();
    let b = CadlagPath::constant(1.7, 4.0).unwrap();
    let c = CadlagPath::constant(0.45, 4.0).unwrap();
    let id = [TimeChange::identity()];
    assert_eq!(skorokhod_upper(&a, &b, &id).unwrap().value, 1.0);
    assert!((skorokhod_upper(&a, &c, &id).unwrap().value - 0.25).abs() < 1e-15);
    assert_eq!(skorokhod_upper(&a, &a, &id).unwrap().value, 0.0);
    assert_eq!(state_metric(0.0, 3.0), 1.0);
    assert!(skorokhod_upper(&a, &b, &[]).is_err());
}

#[test]
fn skorokhod_time_change_beats_identity() {
    let x = CadlagPath::new(0.0, vec![1.0], vec![1.0], 5.0).unwrap();
    let y = CadlagPath::new(0.0, vec![1.1], vec![1.0], 5.0).unwrap();
    let identity = skorokhod_upper(&x, &y, &[TimeChange::identity()]).unwrap();
    // the paths differ by one for every u beyond the first jump
    assert!((identity.value - (-1.0f64).exp()).abs() < 1e-15);
    let candidates = candidate_time_changes(&x, &y, 2, 64);
    assert!(candidates.len() > 1 && candidates.len() <= 64);
    let best = skorokhod_upper(&x, &y, &candidates).unwrap();
    let tail = (-1.0f64).exp() - (-1.1f64).exp();
    assert!(best.value <= 1.1f64.ln().max(tail) + 1e-15);
    assert!(best.value < identity.value);
    assert!((best.gamma - 1.1f64.ln()).abs() < 1e-15);
    assert!((best.integral - tail).abs() < 1e-15);
}

#[test]
fn skorokhod_bound_is_symmetric() {
    let model = KernelModel::sine_asym(0.5).unwrap();
    let dynamics = AprioriDynamics::new(&model);
    for k in 0..10 {
        let x = simulate_indexed(&dynamics, &InitialLaw::Uniform, 4.0, 3, k).unwrap();
        let y = simulate_indexed(&dynamics, &InitialLaw::Uniform, 4.0, 4, k).unwrap();
        let forward = candidate_time_changes(&x, &y, 2, 64);
        let backward: Vec<TimeChange> = forward.iter().map(TimeChange::inverse).collect();
        let dxy = skorokhod_upper(&x, &y, &forward).unwrap().value;
        let dyx = skorokhod_upper(&y, &x, &backward).unwrap().value;
        assert!((dxy - dyx).abs() < 1e-12, "{dxy} vs {dyx}");
        assert_eq!(skorokhod_integral(&x, &x, &TimeChange::identity()), 0.0);
    }
}

#[test]
fn expansiveness_examples() {
    let model = KernelModel::cosine();
    let dynamics = AprioriDynamics::new(&model);
    let w1 = PastPath::new(0.3, vec![-1.0], vec![0.6]).unwrap();
    let w2 = simulate_indexed(&dynamics, &InitialLaw::Point(0.0), 5.0, 8, 0).unwrap();
    let same = expansiveness_check(&w1, &w2, &w2, 2.0).unwrap();
    assert!(same.pass && same.bound == 0.0);
    let far = CadlagPath::constant(0.999, 5.0).unwrap();
    let near = CadlagPath::constant(0.0, 5.0).unwrap();
    let r = expansiveness_check(&w1, &near, &far, 2.0).unwrap();
    assert!(r.pass && r.bound <= (-2.0f64).exp() + 1e-12);
    assert!((r.bound - 0.999 * (-2.0f64).exp()).abs() < 1e-12);
    let r0 = expansiveness_check(&w1, &near, &far, 0.0).unwrap();
    assert!(r0.pass && r0.bound <= 1.0);
    for k in 0..10 {
        let w2p = simulate_indexed(&dynamics, &InitialLaw::Point(0.99), 5.0, 9, k).unwrap();
        assert!(expansiveness_check(&w1, &w2, &w2p, 2.0).unwrap().pass);
    }
}

#[test]
fn simulation_is_deterministic() {
    let model = KernelModel::sine_asym(0.5).unwrap();
    let dynamics = AprioriDynamics::new(&model);
    let a = simulate_indexed(&dynamics, &InitialLaw::Uniform, 10.0, 42, 3).unwrap();
    let b = simulate(&dynamics, &InitialLaw::Uniform, 10.0, &mut path_rng(42, 3)).unwrap();
    let c = simulate_indexed(&dynamics, &InitialLaw::Uniform, 10.0, 42, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(simulate(&dynamics, &InitialLaw::Uniform, 0.0, &mut path_rng(1, 0)).is_err());
}

#[test]
fn rejection_sampling_gives_up() {
    let r = simulate(&Dead, &InitialLaw::Point(0.5), 1e6, &mut path_rng(0, 0));
    assert!(matches!(r, Err(Error::Sampling { proposals: 1_000_000 })));
}

#[test]
fn jump_counts_are_poisson() {
    let model = KernelModel::cosine();
    let dynamics = AprioriDynamics::new(&model);
    let est = ensemble_estimate(&dynamics, &InitialLaw::Uniform, 10.0, 10_000, 7, |w| Ok(w.jump_count() as f64)).unwrap();
    assert!((est.estimate - 10.0).abs() < 3.0 * 10f64.sqrt() / 100.0);
    assert!((est.std_error - 10f64.sqrt() / 100.0).abs() < 0.003);
}

#[test]
fn uniform_kernel_jumps_are_uniform() {
    let model = KernelModel::uniform();
    let dynamics = AprioriDynamics::new(&model);
    let mut states = Vec::new();
    for k in 0..400 {
        let w = simulate_indexed(&dynamics, &InitialLaw::Point(0.5), 5.0, 13, k).unwrap();
        states.extend_from_slice(w.states());
    }
    states.sort_by(|a, b| a.total_cmp(b));
    let n = states.len() as f64;
    let d = states
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max);
    // one-sample Kolmogorov–Smirnov critical value at the 1% level
    assert!(d < 1.628 / n.sqrt(), "D = {d}, n = {n}");
}

#[test]
fn gibbs_occupation_approaches_stationary_density() {
    let n = 16;
    let grid = Grid::new(n).unwrap();
    let disc = Nystrom::new(&KernelModel::polynomial_g(0.5).unwrap(), &grid).unwrap();
    let v = Field::quadratic(0.5, 0.2).on_grid(&grid).unwrap();
    let triple = principal_eigenpair(&disc, &v, EigenOptions::default()).unwrap();
    let gm = GibbsModel::new(&disc, &v, &triple).unwrap();
    let dynamics = GridDynamics::gibbs(&gm).unwrap();
    let target: Vec<f64> = gm.pi.values().iter().map(|p| p / n as f64).collect();
    let chi2 = |horizon: f64| {
        let mut occ = vec![0.0; n];
        let reps = 20;
        for k in 0..reps {
            let w = simulate_indexed(&dynamics, &InitialLaw::Point(0.0), horizon, 21, k).unwrap();
            for (o, x) in occ.iter_mut().zip(w.occupation(n)) {
                *o += x / reps as f64;
            }
        }
        occ.iter().zip(&target).map(|(o, p)| (o - p) * (o - p) / p).sum::<f64>()
    };
    let values: Vec<f64> = [20.0, 200.0, 2000.0].iter().map(|&t| chi2(t)).collect();
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
    assert!(values[2] < 1e-3);
}

#[test]
fn feynman_kac_degenerate_cases() {
    let model = KernelModel::cosine();
    let one = Field::Constant(1.0);
    let est = mc_feynman_kac(&model, &Field::zero(), &one, 0.3, 1.0, 200, 1).unwrap();
    assert_eq!((est.estimate, est.std_error), (1.0, 0.0));
    let c = 0.4;
    let est = mc_feynman_kac(&model, &Field::Constant(c), &one, 0.3, 2.0, 200, 1).unwrap();
    assert!(est.z_score((c * 2.0).exp()) < 3.0);
    assert!((est.estimate - (c * 2.0).exp()).abs() < 1e-12);
    assert!(mc_feynman_kac(&model, &Field::zero(), &one, 0.3, 1.0, 99, 1).is_err());
    assert!(mc_feynman_kac(&model, &Field::zero(), &one, 0.3, 0.0, 200, 1).is_err());
}

#[test]
fn feynman_kac_matches_grid_operator() {
    let model = KernelModel::sine_asym(0.5).unwrap();
    let grid = Grid::new(32).unwrap();
    let disc = Nystrom::new(&model, &grid).unwrap();
    let v = Field::cosine(0.5);
    let f = Field::Trig { constant: 1.0, cos: vec![], sin: vec![0.5] };
    let op = feynman_kac_operator(&disc, Some(&v.on_grid(&grid).unwrap()), 1.0).unwrap();
    let target = op.apply(&f.on_grid(&grid).unwrap());
    for node in [0, 11, 20] {
        let est = mc_feynman_kac(&model, &v, &f, grid.node(node), 1.0, 20_000, 5).unwrap();
        assert!(est.z_score(target.get(node)) < 3.0);
    }
}

#[test]
fn feynman_kac_standard_error_rate() {
    let model = KernelModel::cosine();
    let v = Field::cosine(0.3);
    let one = Field::Constant(1.0);
    let mut ratios = Vec::new();
    for rep in 0..10 {
        let small = mc_feynman_kac(&model, &v, &one, 0.2, 1.0, 1000, 100 + rep).unwrap();
        let large = mc_feynman_kac(&model, &v, &one, 0.2, 1.0, 4000, 200 + rep).unwrap();
        ratios.push(large.std_error / small.std_error);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((0.4..0.6).contains(&mean), "{ratios:?}");
}

#[test]
fn log_radon_nikodym_identities() {
    let model = KernelModel::sine_asym(0.5).unwrap();
    let dynamics = AprioriDynamics::new(&model);
    let w = simulate_indexed(&dynamics, &InitialLaw::Uniform, 5.0, 2, 0).unwrap();
    assert_eq!(path_log_rn(&w, &dynamics, &dynamics).unwrap(), 0.0);

    let a = 0.5;
    let w = CadlagPath::new(0.1, vec![0.7, 1.9], vec![0.35, 0.8], 3.0).unwrap();
    let psi = |x: f64, y: f64| {
        let s = (TAU * (y - x)).sin();
        ((1.0 + a * s) / (1.0 - a * s)).ln()
    };
    let expected = psi(0.1, 0.35) + psi(0.35, 0.8);
    let got = path_log_rn(&w, &dynamics, &ReversedSine(a)).unwrap();
    assert!((got - expected).abs() < 1e-14);
}

#[test]
fn tilted_log_radon_nikodym_telescopes() {
    let grid = Grid::new(20).unwrap();
    let disc = Nystrom::new(&KernelModel::sine_asym(0.4).unwrap(), &grid).unwrap();
    let phi = GridFunction::from_fn(&grid, |x| 1.3 + (TAU * x).cos());
    let am = admissible_model(&disc, &phi, PowerOptions::default()).unwrap();
    let tilted = GridDynamics::tilted(&am).unwrap();
    let apriori = GridDynamics::apriori(&disc).unwrap();
    let log_phi = |x: f64| phi.get(grid.node_index(x).unwrap()).ln();
    for k in 0..20 {
        let w = simulate_indexed(&apriori, &InitialLaw::Uniform, 6.0, 31, k).unwrap();
        let rate_term = w
            .time_integral(|x| Ok(1.0 - am.gamma_tilde.get(grid.node_index(x).unwrap())))
            .unwrap();
        let expected = rate_term + log_phi(w.final_state()) - log_phi(w.x0());
        let got = path_log_rn(&w, &tilted, &apriori).unwrap();
        assert!((got - expected).abs() < 1e-10, "{got} vs {expected}");
    }
}

#[test]
fn symmetric_kernels_produce_no_entropy_along_paths() {
    let grid = Grid::new(16).unwrap();
    let est = mc_entropy_production(&KernelModel::cosine(), &GridFunction::constant(&grid, 1.0), 10.0, 500, 3).unwrap();
    assert!(est.estimate.abs() <= 3.0 * est.std_error);
}

#[test]
fn entropy_production_estimator_is_consistent() {
    let model = KernelModel::sine_asym(0.5).unwrap();
    let grid = Grid::new(64).unwrap();
    let theta = GridFunction::constant(&grid, 1.0);
    let ep = entropy_production_rate(&Nystrom::new(&model, &grid).unwrap(), &theta).unwrap();
    let est = mc_entropy_production(&model, &theta, 20.0, 5000, 77).unwrap();
    assert!(est.z_score(ep) < 3.0, "{est:?} vs {ep}");
}

#[test]
fn entropy_production_error_shrinks_with_horizon() {
    let model = KernelModel::sine_asym(0.5).unwrap();
    let theta = GridFunction::constant(&Grid::new(16).unwrap(), 1.0);
    let mut ratios = Vec::new();
    for seed in 0..10 {
        let short = mc_entropy_production(&model, &theta, 10.0, 2000, seed).unwrap();
        let long = mc_entropy_production(&model, &theta, 20.0, 2000, 1000 + seed).unwrap();
        ratios.push(short.std_error / long.std_error);
    }
    assert!(ratios.iter().all(|r| (1.2..1.7).contains(r)), "{ratios:?}");
}

#[test]
fn tabulated_kernels_move_on_their_grid() {
    let model = KernelModel::sinkhorn_random(12, 4, 50, 0.2).unwrap();
    let dynamics = AprioriDynamics::new(&model);
    assert_eq!(dynamics.state_space(), StateSpace::Grid { n: 12 });
    let grid = Grid::new(12).unwrap();
    let w = simulate_indexed(&dynamics, &InitialLaw::Uniform, 20.0, 6, 0).unwrap();
    assert!(w.jump_count() > 0);
    assert!(w.states().iter().all(|&x| grid.node_index(x).is_some()));
    let from_kernel = GridDynamics::from_kernel(&model, &grid).unwrap();
    assert_eq!(from_kernel.grid().n(), 12);
}
