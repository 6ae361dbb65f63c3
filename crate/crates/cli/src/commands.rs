//! The subcommands. Each one writes `<command>.json` and its CSV outputs into
//! the run directory and returns the exit code.

use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, Result};
use clap::Subcommand;
use ctruelle::io::{write_gibbs_csv, write_grid_function_csv, write_operator_csv, write_path_csv};
use ctruelle::paths::{ensemble_estimate, simulate_indexed};
use ctruelle::spectral::triple_residuals;
use ctruelle::thermo::pressure_probes;
use ctruelle::{
    composition_residual, eigen_residual, entropy_production_rate, expansiveness_check,
    feynman_kac_operator, heat_kernel, invariance_residual, invariant_density,
    kolmogorov_residual, mc_entropy_production, mc_feynman_kac, pressure, principal_eigenpair,
    quadratic_closed_form, refined_eigenpair, reversal_invariance_check, skorokhod_upper,
    candidate_time_changes, validate_kernel, AprioriDynamics, CadlagPath, EigenOptions, Error,
    Field, GibbsModel, Grid, GridDynamics, GridFunction, InitialLaw, JumpDynamics, KernelModel,
    McEstimate, Nystrom, PastPath, PowerOptions, PressureOptions, SeriesOptions,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, KernelKind, Loaded, PotentialKind, Process, SweepParameter};
use crate::run::RunDir;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check the kernel and compute its invariant density.
    Validate,
    /// Heat kernels at the configured times, with oracle and identity checks.
    HeatKernel,
    /// Principal eigentriple of L + V.
    Eigen,
    /// Gibbs process of the potential.
    Gibbs,
    /// Pressure, entropy production and parameter sweeps.
    Thermo,
    /// Path ensembles and Monte Carlo estimates.
    Simulate,
    /// Skorokhod bounds for spliced paths.
    Skorokhod,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::HeatKernel => "heat-kernel",
            Command::Eigen => "eigen",
            Command::Gibbs => "gibbs",
            Command::Thermo => "thermo",
            Command::Simulate => "simulate",
            Command::Skorokhod => "skorokhod",
        }
    }
}

/// Exit code and status word of a finished command.
pub struct Outcome {
    pub exit: u8,
    pub status: &'static str,
}

/// A scalar compared against a limit. NaN never passes.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

fn below(name: impl Into<String>, value: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        value,
        limit,
        pass: value <= limit,
    }
}

fn verdict(checks: &[Check]) -> Outcome {
    if checks.iter().all(|c| c.pass) {
        Outcome { exit: 0, status: "pass" }
    } else {
        Outcome { exit: 1, status: "fail" }
    }
}

pub fn dispatch(command: Command, loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    match command {
        Command::Validate => validate(loaded, dir),
        Command::HeatKernel => heat(loaded, dir),
        Command::Eigen => eigen(loaded, dir),
        Command::Gibbs => gibbs(loaded, dir),
        Command::Thermo => thermo(loaded, dir),
        Command::Simulate => simulate(loaded, dir),
        Command::Skorokhod => skorokhod(loaded, dir),
    }
}

struct Setup {
    kernel: KernelModel,
    field: Field,
    grid: Grid,
    disc: Nystrom,
    v: GridFunction,
}

fn setup(loaded: &Loaded) -> Result<Setup> {
    let kernel = loaded.kernel()?;
    let field = loaded.potential()?;
    let grid = loaded.grid(&kernel, &field)?;
    let disc = Nystrom::new(&kernel, &grid)?;
    let v = field.on_grid(&grid)?;
    Ok(Setup {
        kernel,
        field,
        grid,
        disc,
        v,
    })
}

/// Spectral commands need at least 8 nodes.
fn spectral_setup(loaded: &Loaded) -> Result<Setup> {
    let s = setup(loaded)?;
    if s.grid.n() < 8 {
        bail!(ConfigError(format!("spectral runs need n >= 8, got {}", s.grid.n())));
    }
    Ok(s)
}

fn power_opts(loaded: &Loaded) -> PowerOptions {
    PowerOptions {
        tol: loaded.config.tolerances.power,
        ..PowerOptions::default()
    }
}

fn eigen_opts(loaded: &Loaded) -> EigenOptions {
    let t = &loaded.config.tolerances;
    EigenOptions {
        tol: t.eigen,
        max_iter: t.eigen_max_iter,
    }
}

fn series_opts(loaded: &Loaded) -> SeriesOptions {
    SeriesOptions {
        tol: loaded.config.tolerances.series,
        ..SeriesOptions::default()
    }
}

fn validate(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let tol = &loaded.config.tolerances;
    let kernel = loaded.kernel()?;
    let field = loaded.potential()?;
    let grid = loaded.grid(&kernel, &field)?;
    let report = validate_kernel(&kernel, &grid, tol.kernel)?;
    let mut checks = vec![Check {
        name: "kernel".into(),
        value: report.row_deviation,
        limit: tol.kernel,
        pass: report.pass,
    }];
    let mut density = serde_json::Value::Null;
    if report.pass {
        let disc = Nystrom::new(&kernel, &grid)?;
        let theta = invariant_density(&disc, power_opts(loaded))?;
        let residual = invariance_residual(&disc, &theta);
        checks.push(below("invariance_residual", residual, tol.check));
        write_grid_function_csv(&dir.file("invariant_density.csv"), &theta)?;
        density = json!({
            "residual": residual,
            "mass": theta.integrate(&grid),
            "min": theta.min(),
            "max": theta.max(),
        });
    }
    let outcome = verdict(&checks);
    dir.write_json(
        "validate.json",
        &json!({
            "status": outcome.status,
            "kernel": report,
            "invariant_density": density,
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}

fn time_label(t: f64) -> String {
    format!("t{t}")
}

fn heat(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let tol = &loaded.config.tolerances;
    let times = &loaded.config.times;
    let s = setup(loaded)?;
    let opts = series_opts(loaded);
    let ones = GridFunction::constant(&s.grid, 1.0);
    let with_potential = s.v.sup_norm() > 0.0;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for &t in times {
        let k = heat_kernel(&s.disc, t, opts)?;
        let oracle_gap = k.distance(&feynman_kac_operator(&s.disc, None, t)?);
        let mass = k.apply(&ones).distance(&ones);
        checks.push(below(format!("oracle_gap_{}", time_label(t)), oracle_gap, tol.check));
        checks.push(below(format!("mass_{}", time_label(t)), mass, tol.check));
        for name in write_operator_csv(dir.path(), &format!("heat_{}", time_label(t)), &k)? {
            dir.record(&name);
        }
        if with_potential {
            let fk = feynman_kac_operator(&s.disc, Some(&s.v), t)?;
            for name in write_operator_csv(dir.path(), &format!("fk_{}", time_label(t)), &fk)? {
                dir.record(&name);
            }
        }
        rows.push(json!({ "t": t, "oracle_gap": oracle_gap, "mass_deviation": mass }));
    }
    let mut identities = serde_json::Map::new();
    if let [a, b, ..] = times[..] {
        let r = composition_residual(&s.disc, a, b, opts)?;
        checks.push(below("composition", r, tol.check));
        identities.insert("composition".into(), json!({ "s": a, "t": b, "residual": r }));
    }
    if let Some(&t) = times.iter().find(|&&t| t > 1e-3) {
        let (forward, backward) = kolmogorov_residual(&s.disc, t, 1e-4, opts)?;
        checks.push(below("kolmogorov", forward.max(backward), tol.kolmogorov));
        identities.insert(
            "kolmogorov".into(),
            json!({ "t": t, "forward": forward, "backward": backward }),
        );
    }
    let outcome = verdict(&checks);
    dir.write_json(
        "heat-kernel.json",
        &json!({
            "status": outcome.status,
            "kernel": s.kernel.name(),
            "n": s.grid.n(),
            "times": rows,
            "identities": identities,
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}

fn eigen(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let tol = &loaded.config.tolerances;
    let s = spectral_setup(loaded)?;
    let triple = match principal_eigenpair(&s.disc, &s.v, eigen_opts(loaded)) {
        Ok(t) => t,
        Err(e @ (Error::NonConvergence { .. } | Error::SpectralAnomaly { .. })) => {
            dir.write_json(
                "eigen.json",
                &json!({ "status": "no_eigenpair", "error": e.to_string(), "n": s.grid.n() }),
            )?;
            return Ok(Outcome {
                exit: 3,
                status: "no_eigenpair",
            });
        }
        Err(e) => return Err(e.into()),
    };
    let h = s.grid.h();
    let (right_res, left_res) = triple_residuals(&s.disc, &s.v, &triple)?;
    let left_mass = triple.left.values().sum() * h;
    let pairing = (triple.left.values() * triple.right.values()).sum() * h;
    let mut checks = vec![
        below("right_residual", right_res, tol.check),
        below("left_residual", left_res, tol.check),
        below("left_mass", (left_mass - 1.0).abs(), tol.check),
        below("pairing", (pairing - 1.0).abs(), tol.check),
    ];
    let continuum_residual = if s.field.is_analytic() && !s.kernel.is_tabulated() {
        Some(eigen_residual(&s.disc, &s.v, &triple.right, triple.lambda)?)
    } else {
        None
    };
    let mut closed_form = serde_json::Value::Null;
    if let Some((a0, b)) = loaded.quadratic_pair() {
        let exact = quadratic_closed_form(a0, b, 1.0)?;
        let refined = refined_eigenpair(&s.kernel, &s.field, s.grid.n(), eigen_opts(loaded))?;
        let profile = exact.plus.on_grid(&s.grid);
        let profile = profile.scaled(1.0 / profile.max());
        let gap = (refined.lambda - exact.lambda_plus).abs();
        let eigenfunction_gap = refined.right.distance(&profile);
        checks.push(below("closed_form_gap", gap, tol.closed_form));
        checks.push(below("eigenfunction_gap", eigenfunction_gap, tol.closed_form));
        closed_form = json!({
            "lambda_plus": exact.lambda_plus,
            "lambda_minus": exact.lambda_minus,
            "refined_lambda": refined.lambda,
            "raw_gap": (triple.lambda - exact.lambda_plus).abs(),
            "closed_form_gap": gap,
            "eigenfunction_gap": eigenfunction_gap,
        });
    }
    write_grid_function_csv(&dir.file("eigen_right.csv"), &triple.right)?;
    write_grid_function_csv(&dir.file("eigen_left.csv"), &triple.left)?;
    let outcome = verdict(&checks);
    dir.write_json(
        "eigen.json",
        &json!({
            "status": outcome.status,
            "n": s.grid.n(),
            "lambda": triple.lambda,
            "iterations": triple.iterations,
            "residuals": {
                "right": right_res,
                "left": left_res,
                "continuum": continuum_residual,
            },
            "normalisation": { "left_mass": left_mass, "pairing": pairing },
            "closed_form": closed_form,
            "closed_form_gap": closed_form.get("closed_form_gap"),
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}

fn gibbs(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let tol = &loaded.config.tolerances;
    let s = spectral_setup(loaded)?;
    let triple = principal_eigenpair(&s.disc, &s.v, eigen_opts(loaded))?;
    let gm = GibbsModel::new(&s.disc, &s.v, &triple)?;
    for name in write_gibbs_csv(dir.path(), &gm)? {
        dir.record(&name);
    }
    let ones = GridFunction::constant(&s.grid, 1.0);
    let mut checks = vec![
        below("row_sums", gm.row_sum_deviation(), tol.check),
        below("dual_stationarity", gm.dual_apply(&gm.pi).sup_norm(), tol.check),
        below("balance", gm.balance_residual(), tol.check),
        below("pi_mass", (gm.pi.integrate(&s.grid) - 1.0).abs(), tol.check),
    ];
    for &t in &loaded.config.times {
        let p = gm.semigroup(&s.disc, &s.v, t)?;
        checks.push(below(
            format!("stationarity_{}", time_label(t)),
            p.adjoint_apply(&gm.pi).distance(&gm.pi),
            tol.check,
        ));
        checks.push(below(format!("mass_{}", time_label(t)), p.apply(&ones).distance(&ones), tol.check));
    }
    let outcome = verdict(&checks);
    dir.write_json(
        "gibbs.json",
        &json!({
            "status": outcome.status,
            "n": s.grid.n(),
            "lambda": triple.lambda,
            "gamma": { "min": gm.gamma.min(), "max": gm.gamma.max() },
            "pi": { "min": gm.pi.min(), "max": gm.pi.max() },
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    lambda: f64,
    ep: f64,
}

fn sweep_row(loaded: &Loaded, parameter: SweepParameter, value: f64) -> Result<SweepRow> {
    let mut l = loaded.clone();
    let c = &mut l.config;
    match parameter {
        SweepParameter::A0 if c.kernel.kind == KernelKind::PolynomialG => c.kernel.a0 = value,
        SweepParameter::B if c.potential.kind == PotentialKind::Quadratic => c.potential.b = value,
        SweepParameter::A if c.kernel.kind == KernelKind::SineAsym => c.kernel.amplitude = value,
        _ => bail!(ConfigError(format!(
            "sweep parameter {parameter:?} does not apply to this kernel and potential"
        ))),
    }
    let s = spectral_setup(&l)?;
    let lambda = principal_eigenpair(&s.disc, &s.v, eigen_opts(&l))?.lambda;
    let theta = invariant_density(&s.disc, power_opts(&l))?;
    let ep = entropy_production_rate(&s.disc, &theta)?;
    Ok(SweepRow { value, lambda, ep })
}

fn thermo(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let tol = &loaded.config.tolerances;
    let section = &loaded.config.thermo;
    let s = spectral_setup(loaded)?;
    let power = power_opts(loaded);
    let lambda = principal_eigenpair(&s.disc, &s.v, eigen_opts(loaded))?.lambda;
    let p = pressure(
        &s.disc,
        &s.v,
        PressureOptions {
            grad_tol: tol.pressure_grad,
            power,
            ..PressureOptions::default()
        },
    )?;
    let theta = invariant_density(&s.disc, power)?;
    let (ep, ep_star) = reversal_invariance_check(&s.disc, &theta)?;
    let gap = (p.value - lambda).abs();
    let mut checks = vec![
        Check {
            name: "pressure_converged".into(),
            value: p.gradient_norm,
            limit: tol.pressure_grad,
            pass: p.converged,
        },
        below("pressure_gap", gap, tol.pressure_gap),
        below("ep_nonnegative", -ep, tol.check),
        below("reversal", (ep - ep_star).abs(), tol.check),
    ];
    let mut probe_max = serde_json::Value::Null;
    if section.probes > 0 {
        let values = pressure_probes(&s.disc, &s.v, section.probes, loaded.config.mc.seed, power)?;
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        checks.push(below("probes_below_lambda", max - lambda, tol.probe_margin));
        probe_max = json!(max);
    }
    let mut sweep = serde_json::Value::Null;
    if let Some(sw) = &section.sweep {
        let rows = sw
            .values
            .iter()
            .map(|&x| sweep_row(loaded, sw.parameter, x))
            .collect::<Result<Vec<_>>>()?;
        let name = format!("{:?}", sw.parameter).to_lowercase();
        let mut csv = format!("{name},lambda,ep\n");
        for r in &rows {
            writeln!(csv, "{},{},{}", r.value, r.lambda, r.ep)?;
        }
        fs::write(dir.file("ep_sweep.csv"), csv)?;
        let monotone = rows.windows(2).all(|w| w[1].ep >= w[0].ep) || rows.windows(2).all(|w| w[1].ep <= w[0].ep);
        sweep = json!({ "parameter": name, "rows": rows, "ep_monotone": monotone });
    }
    write_grid_function_csv(&dir.file("pressure_argmax.csv"), &p.argmax)?;
    let outcome = verdict(&checks);
    dir.write_json(
        "thermo.json",
        &json!({
            "status": outcome.status,
            "n": s.grid.n(),
            "pressure": p.value,
            "lambda": lambda,
            "gap": gap,
            "ep": ep,
            "ep_star": ep_star,
            "pressure_iterations": p.iterations,
            "probe_max": probe_max,
            "sweep": sweep,
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}

#[derive(Serialize)]
struct Estimate {
    name: String,
    estimate: f64,
    std_error: f64,
    n_paths: usize,
    seed: u64,
    target: f64,
    z: f64,
}

fn estimate(name: impl Into<String>, mc: McEstimate, target: f64) -> Estimate {
    Estimate {
        name: name.into(),
        estimate: mc.estimate,
        std_error: mc.std_error,
        n_paths: mc.n_paths,
        seed: mc.seed,
        target,
        z: mc.z_score(target),
    }
}

fn write_paths(
    dir: &mut RunDir,
    dynamics: &dyn JumpDynamics,
    init: &InitialLaw,
    horizon: f64,
    seed: u64,
    count: usize,
) -> Result<()> {
    for i in 0..count {
        let w = simulate_indexed(dynamics, init, horizon, seed, i as u64)?;
        write_path_csv(&dir.file(&format!("path_{i:03}.csv")), &w)?;
    }
    Ok(())
}

fn simulate(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let mc = &loaded.config.mc;
    let s = setup(loaded)?;
    let mut estimates = Vec::new();
    let mut occupation_z = Vec::new();
    match mc.process {
        Process::Apriori => {
            let dynamics = AprioriDynamics::new(&s.kernel);
            let init = InitialLaw::Uniform;
            write_paths(dir, &dynamics, &init, mc.horizon, mc.seed, mc.write_paths)?;
            let jumps = ensemble_estimate(&dynamics, &init, mc.horizon, mc.n_paths, mc.seed, |w| {
                Ok(w.jump_count() as f64)
            })?;
            estimates.push(estimate("jump_count", jumps, mc.horizon));
            let fk = feynman_kac_operator(&s.disc, Some(&s.v), mc.fk_time)?
                .apply(&GridFunction::constant(&s.grid, 1.0));
            for (k, &x) in mc.nodes.iter().enumerate() {
                let Some(i) = s.grid.node_index(x) else {
                    bail!(ConfigError(format!("Monte Carlo node {x} is not a grid node")));
                };
                let seed = mc.seed.wrapping_add(1 + k as u64);
                let est = mc_feynman_kac(&s.kernel, &s.field, &Field::Constant(1.0), x, mc.fk_time, mc.fk_paths, seed)?;
                estimates.push(estimate(format!("feynman_kac_x{x}"), est, fk.get(i)));
            }
            if !s.kernel.is_symmetric() {
                let theta = invariant_density(&s.disc, power_opts(loaded))?;
                let ep = entropy_production_rate(&s.disc, &theta)?;
                let seed = mc.seed.wrapping_add(1000);
                let est = mc_entropy_production(&s.kernel, &theta, mc.horizon, mc.n_paths, seed)?;
                estimates.push(estimate("entropy_production", est, ep));
            }
        }
        Process::Gibbs => {
            let triple = principal_eigenpair(&s.disc, &s.v, eigen_opts(loaded))?;
            let gm = GibbsModel::new(&s.disc, &s.v, &triple)?;
            let dynamics = GridDynamics::gibbs(&gm)?;
            let init = InitialLaw::Density(gm.pi.clone());
            write_paths(dir, &dynamics, &init, mc.horizon, mc.seed, mc.write_paths)?;
            let h = s.grid.h();
            let rate = (gm.gamma.values() * gm.pi.values()).sum() * h;
            let jumps = ensemble_estimate(&dynamics, &init, mc.horizon, mc.n_paths, mc.seed, |w| {
                Ok(w.jump_count() as f64)
            })?;
            estimates.push(estimate("jump_count", jumps, rate * mc.horizon));
            occupation_z = occupation_scores(&dynamics, &init, &gm.pi, mc.horizon, mc.n_paths, mc.seed)?;
        }
    }
    let z_limit = loaded.config.tolerances.mc_z;
    let mut checks: Vec<Check> = estimates
        .iter()
        .map(|e| below(format!("z_{}", e.name), e.z, z_limit))
        .collect();
    if !occupation_z.is_empty() {
        let worst = occupation_z.iter().copied().fold(0.0, f64::max);
        checks.push(below("z_occupation_max", worst, z_limit));
    }
    let outcome = verdict(&checks);
    dir.write_json(
        "simulate.json",
        &json!({
            "status": outcome.status,
            "process": mc.process,
            "horizon": mc.horizon,
            "estimates": estimates,
            "occupation_z": occupation_z,
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}

/// Per-node z-scores of the mean occupation fraction against `π h`, for
/// paths started in `π`.
fn occupation_scores(
    dynamics: &GridDynamics,
    init: &InitialLaw,
    pi: &GridFunction,
    horizon: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = pi.len();
    let occupations = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let w = simulate_indexed(dynamics, init, horizon, seed, i as u64)?;
            let mut occ = vec![0.0; n];
            for (a, b, x) in w.segments() {
                occ[(x * n as f64).round() as usize % n] += (b - a) / horizon;
            }
            Ok(occ)
        })
        .collect::<ctruelle::Result<Vec<_>>>()?;
    let m = n_paths as f64;
    let h = 1.0 / n as f64;
    Ok((0..n)
        .map(|k| {
            let mean = occupations.iter().map(|o| o[k]).sum::<f64>() / m;
            let var = occupations.iter().map(|o| (o[k] - mean).powi(2)).sum::<f64>() / (m - 1.0);
            let se = (var / m).sqrt();
            let d = (mean - pi.get(k) * h).abs();
            if se > 0.0 { d / se } else if d == 0.0 { 0.0 } else { f64::INFINITY }
        })
        .collect())
}

/// The path shifted to `(−∞, 0]`: its jumps move by `−horizon`.
fn as_past(w: &CadlagPath) -> Result<PastPath> {
    let times = w.jump_times().iter().map(|t| t - w.horizon()).collect();
    Ok(PastPath::new(w.x0(), times, w.states().to_vec())?)
}

fn skorokhod(loaded: &Loaded, dir: &mut RunDir) -> Result<Outcome> {
    let section = &loaded.config.skorokhod;
    let seed = loaded.config.mc.seed;
    let kernel = loaded.kernel()?;
    let dynamics = AprioriDynamics::new(&kernel);
    let init = InitialLaw::Uniform;
    let horizon = section.horizon;
    let results = (0..section.triples as u64)
        .into_par_iter()
        .map(|k| {
            let w2 = simulate_indexed(&dynamics, &init, horizon, seed, 3 * k)?;
            let w2p = simulate_indexed(&dynamics, &init, horizon, seed, 3 * k + 1)?;
            let w1 = as_past(&simulate_indexed(&dynamics, &init, horizon, seed, 3 * k + 2)?)?;
            let distance = skorokhod_upper(&w2, &w2p, &candidate_time_changes(&w2, &w2p, 2, 64))?.value;
            let reports = section
                .times
                .iter()
                .map(|&t| expansiveness_check(&w1, &w2, &w2p, t))
                .collect::<ctruelle::Result<Vec<_>>>()?;
            Ok((distance, reports))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut csv = String::from("triple,t,bound,threshold,pass\n");
    let mut failures = 0usize;
    let mut worst = f64::NEG_INFINITY;
    for (k, (_, reports)) in results.iter().enumerate() {
        for r in reports {
            writeln!(csv, "{k},{},{},{},{}", r.t, r.bound, r.threshold, r.pass)?;
            failures += usize::from(!r.pass);
            worst = worst.max(r.bound - r.threshold);
        }
    }
    fs::write(dir.file("expansiveness.csv"), csv)?;
    let distances: Vec<f64> = results.iter().map(|(d, _)| *d).collect();
    let checks = vec![Check {
        name: "expansiveness_failures".into(),
        value: failures as f64,
        limit: 0.0,
        pass: failures == 0,
    }];
    let outcome = verdict(&checks);
    dir.write_json(
        "skorokhod.json",
        &json!({
            "status": outcome.status,
            "triples": section.triples,
            "times": section.times,
            "checks_run": section.triples * section.times.len(),
            "failures": failures,
            "max_bound_minus_threshold": worst,
            "future_distance_upper_bounds": distances,
            "checks": checks,
        }),
    )?;
    Ok(outcome)
}
