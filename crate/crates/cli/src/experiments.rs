//! Experiment dispatch: every run reads one validated config, computes
//! deterministically, and emits CSV tables whose headers carry the full
//! resolved configuration.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use ggescatter::gge::{
    correlator_series, fit_correlation_length, string_correlator, CorrelatorKind, GgeState,
    DEFAULT_FIT_WINDOW,
};
use ggescatter::lindblad::{evolve, FactorizedKernel};
use ggescatter::model::{charge_coefficients, BogoliubovTable, ModelParams, MomentumGrid};
use ggescatter::oracle::{
    expectation, project_even_parity, string_op, thermal_state, trace, CMat, LindbladPropagator,
    LindbladSpec, ResetCircuit,
};
use ggescatter::reset::{evolve_cycles, CycleKernel, ResetParams};
use ggescatter::steady::{solve_by_evolution, solve_iterative, Stepper};

use crate::config::{Experiment, InitialKind, RunConfig, VariantKey};
use crate::csvio::{read_table, write_table, Table};
use crate::RunError;

fn numerical(e: impl std::fmt::Display) -> RunError {
    RunError::Numerical(e.to_string())
}

fn header_lines(config: &RunConfig) -> Vec<String> {
    vec![
        format!(
            "ggescatter {} | experiment = {}",
            env!("CARGO_PKG_VERSION"),
            config.run.experiment.name()
        ),
        "resolved config:".to_string(),
        config.resolved_toml(),
    ]
}

fn build_table(config: &RunConfig) -> Result<Arc<BogoliubovTable>, RunError> {
    let m = &config.model;
    let params = match m.variant {
        VariantKey::Continuous => ModelParams::continuous(m.j, m.h),
        VariantKey::Floquet => ModelParams::floquet(m.j, m.h),
    }
    .map_err(numerical)?;
    let grid = MomentumGrid::even_sector(m.l).map_err(numerical)?;
    Ok(Arc::new(
        BogoliubovTable::build(params, grid).map_err(numerical)?,
    ))
}

fn reset_params(config: &RunConfig) -> Result<ResetParams, RunError> {
    let r = config
        .reset
        .as_ref()
        .ok_or_else(|| RunError::Config("reset section is required".into()))?;
    let params = match (&r.lambda, &r.lambdas) {
        (Some(lambda), None) => ResetParams::uniform(r.h_a, r.t, *lambda),
        (None, Some(ls)) => ResetParams::new(r.h_a, ls.clone()),
        _ => unreachable!("validated"),
    };
    params.map_err(numerical)
}

fn initial_state(config: &RunConfig, table: &Arc<BogoliubovTable>) -> Result<GgeState, RunError> {
    match config.initial.kind {
        InitialKind::InfiniteTemperature => Ok(GgeState::infinite_temperature(table.clone())),
        InitialKind::Thermal => Ok(GgeState::thermal(
            table.clone(),
            config.initial.beta.expect("validated"),
        )),
        InitialKind::Ground => Ok(GgeState::ground(table.clone())),
        InitialKind::File => {
            let path = config.initial.path.as_ref().expect("validated");
            let loaded = read_table(Path::new(path))?;
            let n = loaded.column("n").ok_or_else(|| {
                RunError::Config(format!("initial file {path} has no column \"n\""))
            })?;
            GgeState::from_occupations(table.clone(), n).map_err(numerical)
        }
    }
}

/// Appends one (clock, q, n) block for the current state.
fn push_snapshot(out: &mut Table, state: &GgeState) {
    for (k, &n) in state.occupations().iter().enumerate() {
        out.push(vec![state.clock, state.table.grid.momentum(k), n]);
    }
}

pub fn run(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| RunError::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    match config.run.experiment {
        Experiment::EvolveLindblad => evolve_lindblad(config, out_dir),
        Experiment::EvolveReset => evolve_reset(config, out_dir),
        Experiment::SteadyEvolution => steady_evolution(config, out_dir),
        Experiment::SteadyIterative => steady_iterative(config, out_dir),
        Experiment::OracleLindblad => oracle_lindblad(config, out_dir),
        Experiment::OracleReset => oracle_reset(config, out_dir),
        Experiment::Correlators => correlators(config, out_dir),
        Experiment::CompareExact => compare_exact(config, out_dir),
    }
}

fn evolve_lindblad(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let table = build_table(config)?;
    let kernel = FactorizedKernel::new(&table).map_err(numerical)?;
    let mut state = initial_state(config, &table)?;
    let t_end = config.numerics.t_end_scaled.expect("validated");
    let dt = config.numerics.dt_scaled.unwrap_or(0.1);
    let stride = config.numerics.observe_stride.unwrap_or(1);

    let mut out = Table::new(&["eps_t", "q", "n"]);
    push_snapshot(&mut out, &state);
    evolve(&mut state, &kernel, t_end, dt, stride, |s| {
        push_snapshot(&mut out, s)
    })
    .map_err(numerical)?;
    write_table(&out_dir.join("occupations.csv"), &header_lines(config), &out)
}

fn evolve_reset(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let table = build_table(config)?;
    let params = reset_params(config)?;
    let kernel = CycleKernel::new(&table, &params).map_err(numerical)?;
    let mut state = initial_state(config, &table)?;
    let cycles = config.numerics.cycles.expect("validated");
    let stride = config.numerics.observe_stride.unwrap_or(1);

    let mut out = Table::new(&["cycle", "q", "n"]);
    push_snapshot(&mut out, &state);
    evolve_cycles(&mut state, &kernel, cycles, stride, |s| {
        push_snapshot(&mut out, s)
    })
    .map_err(numerical)?;
    write_table(&out_dir.join("occupations.csv"), &header_lines(config), &out)
}

fn solve_steady(config: &RunConfig, table: &Arc<BogoliubovTable>) -> Result<(GgeState, f64, usize), RunError> {
    let tol = config.numerics.tolerance.unwrap_or(1e-10);
    let max_time = config.numerics.max_time.unwrap_or(1e6);
    let initial = initial_state(config, table)?;
    let result = match config.model.variant {
        VariantKey::Continuous => {
            let kernel = FactorizedKernel::new(table).map_err(numerical)?;
            let stepper = Stepper::Lindblad {
                kernel: &kernel,
                dt_scaled: config.numerics.dt_scaled.unwrap_or(0.1),
            };
            solve_by_evolution(initial, &stepper, tol, max_time)
        }
        VariantKey::Floquet => {
            let params = reset_params(config)?;
            let kernel = CycleKernel::new(table, &params).map_err(numerical)?;
            let stepper = Stepper::Reset { kernel: &kernel };
            solve_by_evolution(initial, &stepper, tol, max_time)
        }
    }
    .map_err(numerical)?;
    Ok((result.state, result.residual, result.effort.steps))
}

fn steady_evolution(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let table = build_table(config)?;
    let (state, residual, steps) = solve_steady(config, &table)?;
    let mut out = Table::new(&["q", "n"]);
    for (k, &n) in state.occupations().iter().enumerate() {
        out.push(vec![table.grid.momentum(k), n]);
    }
    let mut header = header_lines(config);
    header.push(format!("residual_flow = {residual}"));
    header.push(format!("steps = {steps}"));
    write_table(&out_dir.join("steady_state.csv"), &header, &out)?;
    write_charges(config, &state, &header, out_dir)
}

/// Per-site conserved-charge expectations of a state, C_0 through the
/// highest requested index (even charges relative to infinite temperature).
fn write_charges(
    config: &RunConfig,
    state: &GgeState,
    header: &[String],
    out_dir: &Path,
) -> Result<(), RunError> {
    let max_index = config.numerics.charge_max.unwrap_or(20);
    let mut out = Table::new(&["index", "value"]);
    for index in 0..=max_index {
        let coeffs = charge_coefficients(&state.table, index);
        let value = ggescatter::gge::charge_expectation(state, &coeffs).map_err(numerical)?;
        out.push(vec![index as f64, value]);
    }
    write_table(&out_dir.join("charges.csv"), header, &out)
}

fn steady_iterative(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let table = build_table(config)?;
    let kernel = FactorizedKernel::new(&table).map_err(numerical)?;
    let k_max = config.numerics.k_max.unwrap_or(12);
    let tol = config.numerics.tolerance.unwrap_or(1e-10);
    let beta0 = config.numerics.initial_beta_guess.unwrap_or(0.3);
    let result = solve_iterative(table.clone(), &kernel, beta0, k_max, tol).map_err(numerical)?;

    let mut steps = Table::new(&["k", "residual"]);
    for step in &result.steps {
        steps.push(vec![step.k as f64, step.residual]);
    }
    let mut header = header_lines(config);
    header.push(format!("termination = {:?}", result.termination));
    header.push(format!("best_residual = {}", result.best.residual));
    write_table(&out_dir.join("iterative_steps.csv"), &header, &steps)?;

    let mut out = Table::new(&["q", "n"]);
    for (k, &n) in result.best.state.occupations().iter().enumerate() {
        out.push(vec![table.grid.momentum(k), n]);
    }
    write_table(&out_dir.join("steady_state.csv"), &header, &out)
}

/// Dense initial state on `l` qubits for the oracle experiments.
fn dense_initial(config: &RunConfig, hamiltonian: &CMat) -> Result<CMat, RunError> {
    let dim = hamiltonian.nrows();
    let rho = match config.initial.kind {
        InitialKind::InfiniteTemperature => {
            CMat::identity(dim, dim) * Complex64::new(1.0 / dim as f64, 0.0)
        }
        InitialKind::Thermal => thermal_state(hamiltonian, config.initial.beta.expect("validated")),
        InitialKind::Ground => {
            let eig = hamiltonian.clone().symmetric_eigen();
            let k_min = (0..dim)
                .min_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]))
                .expect("non-empty spectrum");
            let gs = eig.eigenvectors.column(k_min).clone_owned();
            &gs * gs.adjoint()
        }
        InitialKind::File => {
            return Err(RunError::Config(
                "initial.kind = \"file\" is not supported for dense oracle experiments".into(),
            ))
        }
    };
    Ok(if config.initial.project_even.unwrap_or(false) {
        project_even_parity(&rho)
    } else {
        rho
    })
}

fn oracle_lindblad(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let m = &config.model;
    let epsilon = config.dissipation.as_ref().expect("validated").epsilon;
    let spec = LindbladSpec::tfim(m.j, m.h, m.l, epsilon).map_err(numerical)?;
    let mut rho = dense_initial(config, &spec.hamiltonian)?;
    let t_end = config.numerics.t_end_scaled.expect("validated") / epsilon;
    let dt = config.numerics.oracle_dt.unwrap_or(0.01);
    let stride = config.numerics.observe_stride.unwrap_or(10);

    let xx = string_op(m.l, CorrelatorKind::Xx, m.l / 2 - 1, 1).map_err(numerical)?;
    let yy = string_op(m.l, CorrelatorKind::Yy, m.l / 2 - 1, 1).map_err(numerical)?;
    let mut out = Table::new(&["t", "eps_t", "sxx", "syy", "trace_dev"]);
    let mut step = 0usize;
    let mut prop = LindbladPropagator::new(&spec);
    prop.evolve(&mut rho, t_end, dt, |t, r| {
        if step.is_multiple_of(stride) {
            out.push(vec![
                t,
                t * epsilon,
                expectation(&xx, r),
                expectation(&yy, r),
                (trace(r).re - 1.0).abs(),
            ]);
        }
        step += 1;
    })
    .map_err(numerical)?;
    write_table(&out_dir.join("observables.csv"), &header_lines(config), &out)
}

fn oracle_reset(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let m = &config.model;
    let params = reset_params(config)?;
    let circuit = ResetCircuit::new(m.j, m.h, &params, m.l).map_err(numerical)?;
    let spin_h = ggescatter::oracle::build_tfim_dense(m.j, m.h, m.l).map_err(numerical)?;
    let rho_sys = dense_initial(config, &spin_h)?;
    let cycles = config.numerics.cycles.expect("validated");

    let xx = string_op(m.l, CorrelatorKind::Xx, m.l / 2 - 1, 1).map_err(numerical)?;
    let yy = string_op(m.l, CorrelatorKind::Yy, m.l / 2 - 1, 1).map_err(numerical)?;
    let mut out = Table::new(&["cycle", "sxx", "syy"]);
    out.push(vec![0.0, expectation(&xx, &rho_sys), expectation(&yy, &rho_sys)]);
    circuit
        .run_cycles(&rho_sys, cycles, |cycle, marginal| {
            out.push(vec![
                cycle as f64,
                expectation(&xx, marginal),
                expectation(&yy, marginal),
            ]);
        })
        .map_err(numerical)?;
    write_table(&out_dir.join("observables.csv"), &header_lines(config), &out)
}

fn correlators(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let table = build_table(config)?;
    let (steady, residual, _) = solve_steady(config, &table)?;
    let ground = GgeState::ground(table.clone());
    let [fit_lo, fit_hi] = config
        .numerics
        .fit_window
        .unwrap_or([DEFAULT_FIT_WINDOW.0, DEFAULT_FIT_WINDOW.1]);
    let ell_max = config.numerics.ell_max.unwrap_or(fit_hi).max(fit_hi);

    let mut out = Table::new(&["ell", "sxx_steady", "syy_steady", "sxx_ground", "syy_ground"]);
    for ell in 1..=ell_max {
        out.push(vec![
            ell as f64,
            string_correlator(&steady, CorrelatorKind::Xx, ell).map_err(numerical)?,
            string_correlator(&steady, CorrelatorKind::Yy, ell).map_err(numerical)?,
            string_correlator(&ground, CorrelatorKind::Xx, ell).map_err(numerical)?,
            string_correlator(&ground, CorrelatorKind::Yy, ell).map_err(numerical)?,
        ]);
    }
    let mut header = header_lines(config);
    header.push(format!("residual_flow = {residual}"));
    for (label, state) in [("steady", &steady), ("ground", &ground)] {
        let series = correlator_series(state, CorrelatorKind::Yy, ell_max).map_err(numerical)?;
        match fit_correlation_length(&series, fit_lo, fit_hi) {
            Ok(xi) => header.push(format!("xi_{label}_yy = {xi}")),
            Err(e) => header.push(format!("xi_{label}_yy_error = {e}")),
        }
    }
    write_table(&out_dir.join("correlators.csv"), &header, &out)
}

fn compare_exact(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    match config.model.variant {
        VariantKey::Continuous => compare_exact_lindblad(config, out_dir),
        VariantKey::Floquet => compare_exact_reset(config, out_dir),
    }
}

/// Dense Lindblad vs GGE trajectories of the midchain bond correlators, one
/// block per coupling strength, on a common scaled-time grid.
fn compare_exact_lindblad(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let m = &config.model;
    let table = build_table(config)?;
    let kernel = FactorizedKernel::new(&table).map_err(numerical)?;
    let window = config.numerics.scaled_window.unwrap_or(2.0);
    let stride = config.numerics.scaled_stride.unwrap_or(0.1);
    let dt = config.numerics.oracle_dt.unwrap_or(0.01);
    let dt_gge = config.numerics.dt_scaled.unwrap_or(0.005);
    let epsilons = config.numerics.epsilons.clone().expect("validated");

    let n_snapshots = (window / stride).round() as usize;
    let scaled_grid: Vec<f64> = (0..=n_snapshots).map(|k| stride * k as f64).collect();

    // GGE reference trajectory.
    let mut gge_state = initial_state(config, &table)?;
    let mut gge_xx = vec![string_correlator(&gge_state, CorrelatorKind::Xx, 1).map_err(numerical)?];
    let mut gge_yy = vec![string_correlator(&gge_state, CorrelatorKind::Yy, 1).map_err(numerical)?];
    for w in scaled_grid.windows(2) {
        evolve(&mut gge_state, &kernel, w[1], dt_gge, usize::MAX, |_| {}).map_err(numerical)?;
        gge_xx.push(string_correlator(&gge_state, CorrelatorKind::Xx, 1).map_err(numerical)?);
        gge_yy.push(string_correlator(&gge_state, CorrelatorKind::Yy, 1).map_err(numerical)?);
    }

    let xx_op = string_op(m.l, CorrelatorKind::Xx, m.l / 2 - 1, 1).map_err(numerical)?;
    let yy_op = string_op(m.l, CorrelatorKind::Yy, m.l / 2 - 1, 1).map_err(numerical)?;
    let mut out = Table::new(&["epsilon", "eps_t", "sxx_exact", "sxx_gge", "syy_exact", "syy_gge"]);
    let mut summary = Vec::new();
    for &epsilon in &epsilons {
        let mut cfg_eps = config.clone();
        cfg_eps.initial.project_even = Some(config.initial.project_even.unwrap_or(true));
        let spec = LindbladSpec::tfim(m.j, m.h, m.l, epsilon).map_err(numerical)?;
        let mut rho = dense_initial(&cfg_eps, &spec.hamiltonian)?;
        let mut prop = LindbladPropagator::new(&spec);
        let mut idx = 0usize;
        let mut worst: f64 = 0.0;
        prop.evolve(&mut rho, window / epsilon, dt, |t, r| {
            let scaled = t * epsilon;
            if idx < scaled_grid.len() && (scaled - scaled_grid[idx]).abs() < dt * epsilon * 0.5 {
                let sxx = expectation(&xx_op, r);
                let syy = expectation(&yy_op, r);
                worst = worst.max((sxx - gge_xx[idx]).abs());
                out.push(vec![epsilon, scaled_grid[idx], sxx, gge_xx[idx], syy, gge_yy[idx]]);
                idx += 1;
            }
        })
        .map_err(numerical)?;
        summary.push(format!("max_dev_sxx[epsilon = {epsilon}] = {worst}"));
    }
    let mut header = header_lines(config);
    header.extend(summary);
    write_table(&out_dir.join("deviations.csv"), &header, &out)
}

/// Exact reset circuit vs GGE cycle evolution, one block per coupling, over
/// a fixed λ²-scaled cycle window.
fn compare_exact_reset(config: &RunConfig, out_dir: &Path) -> Result<(), RunError> {
    let m = &config.model;
    let table = build_table(config)?;
    let window = config.numerics.scaled_window.unwrap_or(1.6);
    let lambdas = config.numerics.lambdas.clone().expect("validated");
    let base = config
        .reset
        .as_ref()
        .ok_or_else(|| RunError::Config("reset section is required".into()))?;

    let spin_h = ggescatter::oracle::build_tfim_dense(m.j, m.h, m.l).map_err(numerical)?;
    let xx_op = string_op(m.l, CorrelatorKind::Xx, m.l / 2 - 1, 1).map_err(numerical)?;
    let yy_op = string_op(m.l, CorrelatorKind::Yy, m.l / 2 - 1, 1).map_err(numerical)?;
    let mut out = Table::new(&[
        "lambda",
        "cycle",
        "scaled_cycle",
        "sxx_exact",
        "sxx_gge",
        "syy_exact",
        "syy_gge",
    ]);
    let mut summary = Vec::new();
    for &lambda in &lambdas {
        let params = ResetParams::uniform(base.h_a, base.t, lambda).map_err(numerical)?;
        let kernel = CycleKernel::new(&table, &params).map_err(numerical)?;
        let cycles = (window / (lambda * lambda)).ceil() as usize;

        let mut gge = initial_state(config, &table)?;
        let mut gge_xx = Vec::with_capacity(cycles);
        let mut gge_yy = Vec::with_capacity(cycles);
        evolve_cycles(&mut gge, &kernel, cycles, 1, |s| {
            gge_xx.push(string_correlator(s, CorrelatorKind::Xx, 1).unwrap());
            gge_yy.push(string_correlator(s, CorrelatorKind::Yy, 1).unwrap());
        })
        .map_err(numerical)?;

        let mut cfg_lambda = config.clone();
        cfg_lambda.initial.project_even = Some(config.initial.project_even.unwrap_or(true));
        let rho_sys = dense_initial(&cfg_lambda, &spin_h)?;
        let circuit = ResetCircuit::new(m.j, m.h, &params, m.l).map_err(numerical)?;
        let mut worst: f64 = 0.0;
        circuit
            .run_cycles(&rho_sys, cycles, |cycle, marginal| {
                let sxx = expectation(&xx_op, marginal);
                let syy = expectation(&yy_op, marginal);
                worst = worst.max((sxx - gge_xx[cycle - 1]).abs());
                out.push(vec![
                    lambda,
                    cycle as f64,
                    lambda * lambda * cycle as f64,
                    sxx,
                    gge_xx[cycle - 1],
                    syy,
                    gge_yy[cycle - 1],
                ]);
            })
            .map_err(numerical)?;
        summary.push(format!("max_dev_sxx[lambda = {lambda}] = {worst}"));
    }
    let mut header = header_lines(config);
    header.extend(summary);
    write_table(&out_dir.join("deviations.csv"), &header, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_rows_scale_with_grid() {
        let text = r#"
[run]
experiment = "evolve-lindblad"
[model]
variant = "continuous"
j = 1.0
h = 0.6
l = 16
[numerics]
t_end_scaled = 1.0
dt_scaled = 0.5
"#;
        let config = RunConfig::parse(text).unwrap();
        let table = build_table(&config).unwrap();
        let kernel = FactorizedKernel::new(&table).unwrap();
        let mut state = initial_state(&config, &table).unwrap();
        let mut out = Table::new(&["eps_t", "q", "n"]);
        push_snapshot(&mut out, &state);
        evolve(&mut state, &kernel, 1.0, 0.5, 1, |s| push_snapshot(&mut out, s)).unwrap();
        assert_eq!(out.rows.len(), 16 * 3);
    }
}
