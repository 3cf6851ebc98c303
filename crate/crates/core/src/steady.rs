//! Steady-state solvers: fixpoint-by-evolution for both dissipation
//! channels, and the iterative truncated-GGE construction that adds one
//! dissipator-selected conserved direction per step and re-solves the
//! stationarity conditions with a damped Newton method.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gge::{occupations_from_multipliers, GgeState};
use crate::lindblad::{self, FactorizedKernel};
use crate::model::BogoliubovTable;
use crate::reset::{self, CycleKernel};

/// Which flow drives the evolution: the continuous-time scattering rate
/// (per scaled time, stepped with explicit Euler) or the per-cycle update
/// of the reset protocol.
pub enum Stepper<'a> {
    Lindblad {
        kernel: &'a FactorizedKernel,
        dt_scaled: f64,
    },
    Reset { kernel: &'a CycleKernel },
}

impl Stepper<'_> {
    /// d⟨n_q⟩ per unit of this stepper's clock.
    pub fn flow(&self, state: &GgeState) -> Result<Vec<f64>> {
        match self {
            Stepper::Lindblad { kernel, .. } => lindblad::rate(state, kernel),
            Stepper::Reset { kernel } => reset::cycle_rate(state, kernel),
        }
    }

    fn advance(&self, state: &mut GgeState, flow: &[f64]) {
        match self {
            Stepper::Lindblad { dt_scaled, .. } => {
                for (n, r) in state.n.iter_mut().zip(flow) {
                    *n = crate::gge::clamp_occupation(*n + dt_scaled * r);
                }
                state.clock += dt_scaled;
            }
            Stepper::Reset { .. } => {
                for (n, d) in state.n.iter_mut().zip(flow) {
                    *n = crate::gge::clamp_occupation(*n + d);
                }
                state.clock += 1.0;
            }
        }
    }
}

/// Average remaining flow (1/L) Σ_q |d⟨n_q⟩|, the distance-from-
/// stationarity diagnostic.
pub fn residual_flow(state: &GgeState, stepper: &Stepper) -> Result<f64> {
    let flow = stepper.flow(state)?;
    Ok(mean_abs(&flow))
}

fn mean_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum::<f64>() / v.len() as f64
}

/// Solver effort counters.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverEffort {
    pub steps: usize,
    pub flow_evaluations: usize,
}

/// A converged (or best-found) stationary state with its residual flow.
#[derive(Debug, Clone)]
pub struct SteadyResult {
    pub state: GgeState,
    pub residual: f64,
    pub effort: SolverEffort,
}

/// Evolves until the residual flow drops below `tol` or the clock has
/// advanced by `max_time` (scaled time or cycles, per the stepper).
pub fn solve_by_evolution(
    mut state: GgeState,
    stepper: &Stepper,
    tol: f64,
    max_time: f64,
) -> Result<SteadyResult> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let start = state.clock;
    let mut effort = SolverEffort::default();
    loop {
        let flow = stepper.flow(&state)?;
        effort.flow_evaluations += 1;
        let residual = mean_abs(&flow);
        if residual < tol {
            return Ok(SteadyResult {
                state,
                residual,
                effort,
            });
        }
        if state.clock - start >= max_time {
            return Err(Error::NotConverged {
                tol,
                max_time,
                residual,
            });
        }
        stepper.advance(&mut state, &flow);
        effort.steps += 1;
    }
}

/// One accepted step of the iterative construction.
#[derive(Debug, Clone)]
pub struct IterativeStep {
    /// Number of conserved directions beyond the Hamiltonian.
    pub k: usize,
    /// Residual flow of the state after solving this step.
    pub residual: f64,
    /// Lagrange multipliers of the truncated ensemble.
    pub lambdas: Vec<f64>,
    pub state: GgeState,
}

/// How the iterative solver stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IterativeTermination {
    /// Ran all requested steps.
    Completed,
    /// A step increased the residual; best-so-far returned.
    NonImproving { at_step: usize },
    /// The root solve failed after at least one accepted step.
    RootSolveFailed { at_step: usize },
    /// Residual dropped below the requested tolerance.
    Converged { at_step: usize },
}

/// Full record of an iterative steady-state construction.
#[derive(Debug, Clone)]
pub struct IterativeResult {
    pub steps: Vec<IterativeStep>,
    pub best: SteadyResult,
    pub termination: IterativeTermination,
}

/// Iterative truncated-GGE steady state. Step 0 fits a Gibbs ensemble
/// (single multiplier on the energy); step k adds the direction
/// w_m = -χ_mm⁻¹ ⟨ṅ_m⟩ evaluated at the previous solution and re-solves
/// the k+1 stationarity conditions ⟨Ċ̃_{k'}⟩ = 0. Terminates early when a
/// step stops improving the residual, returning the best state found.
pub fn solve_iterative(
    table: Arc<BogoliubovTable>,
    kernel: &FactorizedKernel,
    initial_beta: f64,
    k_max: usize,
    tol: f64,
) -> Result<IterativeResult> {
    const ROOT_TOL: f64 = 1e-12;
    let mut effort = SolverEffort::default();

    // Step 0: Gibbs fit on C_0 = H_0.
    let mut directions: Vec<Vec<f64>> = vec![table.eps.clone()];
    let mut lambdas = vec![initial_beta];
    let newton = |lambdas: &[f64], directions: &[Vec<f64>], effort: &mut SolverEffort| {
        newton_stationarity(&table, kernel, directions, lambdas, ROOT_TOL, 60, effort)
    };
    let (lam0, state0) = newton(&lambdas, &directions, &mut effort).map_err(|e| match e {
        Error::RootSolveFailure { residual, .. } => Error::RootSolveFailure {
            step: 0,
            message: "Gibbs fit for the energy stationarity failed".into(),
            residual,
        },
        other => other,
    })?;
    lambdas = lam0;
    let mut best_state = state0.clone();
    let mut best_residual = mean_abs(&lindblad::rate(&state0, kernel)?);
    let mut steps = vec![IterativeStep {
        k: 0,
        residual: best_residual,
        lambdas: lambdas.clone(),
        state: state0.clone(),
    }];

    let mut current = state0;
    let mut termination = IterativeTermination::Completed;
    for k in 1..=k_max {
        if best_residual < tol {
            termination = IterativeTermination::Converged { at_step: k - 1 };
            break;
        }
        // New direction from the remaining flow of the previous solution.
        // The direction magnitude shrinks with the residual, so it is
        // rescaled to unit max-norm (absorbed into its multiplier, the
        // ensemble is unchanged) to keep the Newton system well
        // conditioned deep into the convergence.
        let flow = lindblad::rate(&current, kernel)?;
        effort.flow_evaluations += 1;
        let chi = current.susceptibility();
        let mut w: Vec<f64> = flow.iter().zip(&chi).map(|(f, x)| -f / x).collect();
        let scale = w.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if scale == 0.0 {
            termination = IterativeTermination::Converged { at_step: k - 1 };
            break;
        }
        for x in &mut w {
            *x /= scale;
        }
        directions.push(w);
        lambdas.push(0.0);

        match newton(&lambdas, &directions, &mut effort) {
            Ok((lam, state)) => {
                let residual = mean_abs(&lindblad::rate(&state, kernel)?);
                effort.flow_evaluations += 1;
                steps.push(IterativeStep {
                    k,
                    residual,
                    lambdas: lam.clone(),
                    state: state.clone(),
                });
                if residual >= best_residual {
                    termination = IterativeTermination::NonImproving { at_step: k };
                    break;
                }
                best_residual = residual;
                best_state = state.clone();
                lambdas = lam;
                current = state;
            }
            Err(_) => {
                termination = IterativeTermination::RootSolveFailed { at_step: k };
                break;
            }
        }
        effort.steps += 1;
    }

    Ok(IterativeResult {
        steps,
        best: SteadyResult {
            state: best_state,
            residual: best_residual,
            effort,
        },
        termination,
    })
}

/// Damped Newton (with a Levenberg-Marquardt fallback) on the per-site
/// stationarity system F_{k'}(λ) = (1/L) Σ_m c̃^{(k')}_m ⟨ṅ_m⟩(n(λ)) = 0,
/// where μ_m = Σ_{k'} λ_{k'} c̃^{(k')}_m. The Jacobian is exact: the rate
/// is quadratic in n and ∂n_m/∂λ_j = -χ_mm c̃^{(j)}_m with diagonal χ.
#[allow(clippy::too_many_arguments)]
fn newton_stationarity(
    table: &Arc<BogoliubovTable>,
    kernel: &FactorizedKernel,
    directions: &[Vec<f64>],
    lambda0: &[f64],
    f_tol: f64,
    max_iter: usize,
    effort: &mut SolverEffort,
) -> Result<(Vec<f64>, GgeState)> {
    let m = directions.len();
    let l = table.len();
    let state_of = |lambda: &[f64]| -> GgeState {
        let mut mu = vec![0.0; l];
        for (lam, dir) in lambda.iter().zip(directions) {
            for (mu_m, d) in mu.iter_mut().zip(dir) {
                *mu_m += lam * d;
            }
        }
        GgeState {
            table: table.clone(),
            n: occupations_from_multipliers(&mu),
            clock: 0.0,
        }
    };
    let f_of = |state: &GgeState, effort: &mut SolverEffort| -> Result<Vec<f64>> {
        let flow = lindblad::rate(state, kernel)?;
        effort.flow_evaluations += 1;
        Ok(directions
            .iter()
            .map(|dir| dir.iter().zip(&flow).map(|(c, r)| c * r).sum::<f64>() / l as f64)
            .collect())
    };
    let norm_inf = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let norm2 = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();

    let mut lambda = lambda0.to_vec();
    let mut state = state_of(&lambda);
    let mut f = f_of(&state, effort)?;
    for _ in 0..max_iter {
        if norm_inf(&f) < f_tol {
            return Ok((lambda, state));
        }
        // Exact Jacobian, one directional rate derivative per variable.
        let chi = state.susceptibility();
        let mut jac = nalgebra::DMatrix::<f64>::zeros(m, m);
        for j in 0..m {
            let delta: Vec<f64> = chi
                .iter()
                .zip(&directions[j])
                .map(|(x, c)| -x * c)
                .collect();
            let drate = lindblad::rate_directional(&state, &delta, kernel);
            effort.flow_evaluations += 1;
            for kp in 0..m {
                jac[(kp, j)] = directions[kp]
                    .iter()
                    .zip(&drate)
                    .map(|(c, r)| c * r)
                    .sum::<f64>()
                    / l as f64;
            }
        }
        let rhs = nalgebra::DVector::from_iterator(m, f.iter().map(|x| -x));
        let newton_dir = jac.clone().lu().solve(&rhs);

        let mut applied = false;
        if let Some(dir) = newton_dir {
            // Backtracking line search on ||F||².
            let f2 = norm2(&f);
            let mut t = 1.0;
            for _ in 0..40 {
                let trial: Vec<f64> = lambda
                    .iter()
                    .zip(dir.iter())
                    .map(|(l, d)| l + t * d)
                    .collect();
                let trial_state = state_of(&trial);
                let trial_f = f_of(&trial_state, effort)?;
                if norm2(&trial_f) < f2 * (1.0 - 1e-4 * t) || norm2(&trial_f) < f_tol * f_tol {
                    lambda = trial;
                    state = trial_state;
                    f = trial_f;
                    applied = true;
                    break;
                }
                t *= 0.5;
            }
        }
        if !applied {
            // Levenberg-Marquardt fallback with increasing damping.
            let jt = jac.transpose();
            let jtj = &jt * &jac;
            let jtf = &jt * nalgebra::DVector::from_iterator(m, f.iter().copied());
            let mut eta = 1e-8 * (1.0 + jtj.diagonal().amax());
            let f2 = norm2(&f);
            let mut improved = false;
            for _ in 0..40 {
                let damped = &jtj + nalgebra::DMatrix::identity(m, m) * eta;
                if let Some(dir) = damped.lu().solve(&(-&jtf)) {
                    let trial: Vec<f64> = lambda
                        .iter()
                        .zip(dir.iter())
                        .map(|(l, d)| l + d)
                        .collect();
                    let trial_state = state_of(&trial);
                    let trial_f = f_of(&trial_state, effort)?;
                    if norm2(&trial_f) < f2 {
                        lambda = trial;
                        state = trial_state;
                        f = trial_f;
                        improved = true;
                        break;
                    }
                }
                eta *= 10.0;
            }
            if !improved {
                return Err(Error::RootSolveFailure {
                    step: m - 1,
                    message: "both Newton and damped steps stalled".into(),
                    residual: norm_inf(&f),
                });
            }
        }
    }
    if norm_inf(&f) < f_tol {
        Ok((lambda, state))
    } else {
        Err(Error::RootSolveFailure {
            step: m - 1,
            message: "iteration limit reached".into(),
            residual: norm_inf(&f),
        })
    }
}
