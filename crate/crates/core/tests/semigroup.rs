use std::f64::consts::TAU;

use ctruelle::semigroup::trig_probes;
use ctruelle::{
    composition_residual, feynman_kac_operator, heat_kernel, invariant_density, kernel_power,
    kolmogorov_residual, q_k_matrix, selfadjoint_residual, Error, Field, Grid, GridFunction,
    GridOperator, KernelModel, Nystrom, PowerOptions, SeriesOptions,
};
use ndarray::Array2;

fn builtins() -> Vec<KernelModel> {
    vec![
        KernelModel::cosine(),
        KernelModel::polynomial_g(0.5).unwrap(),
        KernelModel::sine_asym(0.5).unwrap(),
        KernelModel::uniform(),
    ]
}

fn max_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn cosine_q_k_closed_form() {
    let grid = Grid::new(32).unwrap();
    let disc = Nystrom::new(&KernelModel::cosine(), &grid).unwrap();
    for k in 1..=8 {
        let q = q_k_matrix(&disc, k).unwrap();
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let mut err = 0.0_f64;
        for i in 0..32 {
            for j in 0..32 {
                let c = (TAU * (grid.node(i) - grid.node(j))).cos();
                let exact = 2.0 * c * (sign + (-0.75f64).powi(k as i32)) + sign;
                err = err.max((q[[i, j]] - exact).abs());
            }
        }
        assert!(err < 1e-10, "k = {k}: {err}");
    }
}

#[test]
fn q_k_small_cases() {
    let grid = Grid::new(16).unwrap();
    let disc = Nystrom::new(&KernelModel::sine_asym(0.5).unwrap(), &grid).unwrap();
    assert_eq!(q_k_matrix(&disc, 1).unwrap(), disc.p().clone());
    let p2 = kernel_power(&disc, 2).unwrap();
    let expected = &p2 - &(disc.p() * 2.0);
    assert!(max_diff(&q_k_matrix(&disc, 2).unwrap(), &expected) < 1e-14);
    assert!(q_k_matrix(&disc, 0).is_err());
}

#[test]
fn q_k_satisfies_recursion() {
    let grid = Grid::new(16).unwrap();
    let disc = Nystrom::new(&KernelModel::polynomial_g(0.3).unwrap(), &grid).unwrap();
    let h = grid.h();
    for k in 1..7 {
        let qk = q_k_matrix(&disc, k).unwrap();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let next = qk.dot(disc.p()) * h - &qk + &(disc.p() * sign);
        assert!(max_diff(&next, &q_k_matrix(&disc, k + 1).unwrap()) < 1e-10, "k = {k}");
    }
}

#[test]
fn cosine_heat_kernel() {
    let grid = Grid::new(64).unwrap();
    let disc = Nystrom::new(&KernelModel::cosine(), &grid).unwrap();
    let k = heat_kernel(&disc, 1.0, SeriesOptions::default()).unwrap();
    let e = (-1.0f64).exp();
    for i in 0..64 {
        for j in 0..64 {
            let c = (TAU * (grid.node(i) - grid.node(j))).cos();
            let exact = 2.0 * c * ((-0.75f64).exp() - e) + 1.0 - e;
            assert!((k.integral_part()[[i, j]] - exact).abs() < 1e-8);
        }
    }
    assert!(k.atomic_diag().distance(&GridFunction::constant(&grid, e)) < 1e-15);
}

#[test]
fn heat_kernel_at_zero_is_identity() {
    let grid = Grid::new(16).unwrap();
    for model in builtins() {
        let disc = Nystrom::new(&model, &grid).unwrap();
        let k = heat_kernel(&disc, 0.0, SeriesOptions::default()).unwrap();
        assert!(k.integral_part().iter().all(|&v| v == 0.0));
        assert!(k.atomic_diag().values().iter().all(|&v| v == 1.0));
    }
}

#[test]
fn heat_kernel_matches_exponential_oracle() {
    let grid = Grid::new(48).unwrap();
    for model in builtins() {
        let disc = Nystrom::new(&model, &grid).unwrap();
        for t in [0.7, 3.0, 25.0] {
            let series = heat_kernel(&disc, t, SeriesOptions::default()).unwrap();
            let oracle = feynman_kac_operator(&disc, None, t).unwrap();
            let gap = series.distance(&oracle);
            assert!(gap < 1e-8, "{} t = {t}: {gap}", model.name());
        }
    }
}

#[test]
fn heat_kernel_reports_truncation() {
    let grid = Grid::new(16).unwrap();
    let disc = Nystrom::new(&KernelModel::cosine(), &grid).unwrap();
    let opts = SeriesOptions { tol: 1e-12, k_max: 4 };
    match heat_kernel(&disc, 1.0, opts) {
        Err(Error::Truncation { achieved, k_max }) => {
            assert_eq!(k_max, 4);
            assert!(achieved > 1e-12);
        }
        other => panic!("expected truncation, got {other:?}"),
    }
    assert!(heat_kernel(&disc, -1.0, SeriesOptions::default()).is_err());
}

#[test]
fn feynman_kac_reductions() {
    let grid = Grid::new(32).unwrap();
    let disc = Nystrom::new(&KernelModel::sine_asym(0.5).unwrap(), &grid).unwrap();
    let t = 1.3;
    let heat = heat_kernel(&disc, t, SeriesOptions::default()).unwrap();
    let zero = feynman_kac_operator(&disc, Some(&GridFunction::zeros(&grid)), t).unwrap();
    assert!(heat.distance(&zero) < 1e-10);

    let c = 0.4;
    let shifted = feynman_kac_operator(&disc, Some(&GridFunction::constant(&grid, c)), t).unwrap();
    let scaled = heat.integral_part() * (c * t).exp();
    assert!(max_diff(shifted.integral_part(), &scaled) < 1e-10);
    let atom = (t * (c - 1.0)).exp();
    assert!(shifted.atomic_diag().distance(&GridFunction::constant(&grid, atom)) < 1e-15);
}

#[test]
fn feynman_kac_kernel_is_positive() {
    let grid = Grid::new(32).unwrap();
    let v = Field::cosine(0.3).on_grid(&grid).unwrap();
    for model in builtins() {
        let disc = Nystrom::new(&model, &grid).unwrap();
        let op = feynman_kac_operator(&disc, Some(&v), 1.0).unwrap();
        let min = op.integral_part().iter().copied().fold(f64::INFINITY, f64::min);
        assert!(min > 0.0, "{}: {min}", model.name());
    }
}

#[test]
fn composition_identity() {
    let grid = Grid::new(64).unwrap();
    let opts = SeriesOptions::default();
    let cos = Nystrom::new(&KernelModel::cosine(), &grid).unwrap();
    assert!(composition_residual(&cos, 0.5, 0.5, opts).unwrap() < 1e-8);
    assert!(composition_residual(&cos, 0.0, 0.8, opts).unwrap() < 1e-12);
    let sine = Nystrom::new(&KernelModel::sine_asym(0.5).unwrap(), &grid).unwrap();
    assert!(composition_residual(&sine, 0.3, 0.9, opts).unwrap() < 1e-7);
}

#[test]
fn operator_composition_is_semigroup_law() {
    let grid = Grid::new(32).unwrap();
    let disc = Nystrom::new(&KernelModel::polynomial_g(0.5).unwrap(), &grid).unwrap();
    let v = Field::quadratic(0.5, 0.2).on_grid(&grid).unwrap();
    let a = feynman_kac_operator(&disc, Some(&v), 0.4).unwrap();
    let b = feynman_kac_operator(&disc, Some(&v), 1.1).unwrap();
    let ab = feynman_kac_operator(&disc, Some(&v), 1.5).unwrap();
    assert!(a.compose(&b).distance(&ab) < 1e-10);
    let id = GridOperator::identity(&grid);
    assert!(id.compose(&a).distance(&a) < 1e-15);
}

#[test]
fn kolmogorov_equations() {
    let grid = Grid::new(64).unwrap();
    let opts = SeriesOptions::default();
    for model in [KernelModel::cosine(), KernelModel::polynomial_g(0.5).unwrap()] {
        let disc = Nystrom::new(&model, &grid).unwrap();
        let (f, b) = kolmogorov_residual(&disc, 1.0, 1e-4, opts).unwrap();
        assert!(f < 1e-6 && b < 1e-6);
        assert!((f - b).abs() < 1e-10, "{}: {f} vs {b}", model.name());
    }
    let sine = Nystrom::new(&KernelModel::sine_asym(0.5).unwrap(), &grid).unwrap();
    let (f, b) = kolmogorov_residual(&sine, 1.0, 1e-4, opts).unwrap();
    assert!(f < 1e-5 && b < 1e-5);
    assert!(kolmogorov_residual(&sine, 1e-5, 1e-4, opts).is_err());
}

#[test]
fn self_adjointness() {
    let grid = Grid::new(64).unwrap();
    let v = Field::cosine(0.3).on_grid(&grid).unwrap();
    let cos = Nystrom::new(&KernelModel::cosine(), &grid).unwrap();
    let theta = invariant_density(&cos, PowerOptions::default()).unwrap();
    assert!(selfadjoint_residual(&cos, Some(&v), 1.0, &theta).unwrap() < 1e-9);
    let sine = Nystrom::new(&KernelModel::sine_asym(0.5).unwrap(), &grid).unwrap();
    let ones = GridFunction::constant(&grid, 1.0);
    assert!(selfadjoint_residual(&sine, None, 1.0, &ones).unwrap() > 1e-3);
}

#[test]
fn probe_pairing_is_symmetric_on_the_diagonal() {
    // ⟨P f, f⟩ = ⟨f, P f⟩ for any operator: the f = g contribution vanishes
    let grid = Grid::new(32).unwrap();
    let disc = Nystrom::new(&KernelModel::sine_asym(0.5).unwrap(), &grid).unwrap();
    let op = feynman_kac_operator(&disc, None, 1.0).unwrap();
    for f in trig_probes(&grid) {
        let pf = op.apply(&f);
        let lhs = pf.zip_map(&f, |a, b| a * b).integrate(&grid);
        let rhs = f.zip_map(&pf, |a, b| a * b).integrate(&grid);
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn heat_kernel_conserves_mass() {
    let grid = Grid::new(32).unwrap();
    let ones = GridFunction::constant(&grid, 1.0);
    for model in builtins() {
        let disc = Nystrom::new(&model, &grid).unwrap();
        let k = heat_kernel(&disc, 2.0, SeriesOptions::default()).unwrap();
        assert!(k.apply(&ones).distance(&ones) < 1e-12, "{}", model.name());
    }
}
