//! Scattering theory for the digital reset protocol: the Trotterized chain
//! is coupled once per step to ancilla qubits that are reset to spin-down
//! every T steps. To second order in the coupling, one reset cycle changes
//! the occupations by
//!
//! Δ⟨n_q⟩ = (2/L) Σ_{q'} [ g^s_{q,q'} ((1-n_q) n_{q'} a_{ε̃_{q'}-ε̃_q}
//!                                     - n_q (1-n_{q'}) a_{ε̃_q-ε̃_{q'}})
//!          + g^{ca}_{q,q'} ((1-n_q)(1-n_{q'}) a_{-ε̃_{q'}-ε̃_q}
//!                                     - n_q n_{q'} a_{ε̃_{q'}+ε̃_q}) ],
//!
//! where the ancilla spectral function a_ω selects which quasiparticle
//! transitions the bath drives and the g kernels carry the Ising
//! parameters through the Floquet Bogoliubov coefficients.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::gge::{clamp_occupation, GgeState};
use crate::model::{BogoliubovTable, Variant};

/// Ancilla field, cycle length and per-step coupling schedule λ_τ.
/// The cycle length T is the schedule length.
#[derive(Debug, Clone)]
pub struct ResetParams {
    pub h_a: f64,
    pub lambdas: Vec<f64>,
}

impl ResetParams {
    pub fn new(h_a: f64, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParameter(
                "coupling schedule must contain at least one step".into(),
            ));
        }
        if !h_a.is_finite() || lambdas.iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParameter(
                "ancilla field and couplings must be finite".into(),
            ));
        }
        Ok(Self { h_a, lambdas })
    }

    /// Constant schedule λ_τ = λ for T steps.
    pub fn uniform(h_a: f64, t: usize, lambda: f64) -> Result<Self> {
        Self::new(h_a, vec![lambda; t])
    }

    /// Steps per reset cycle.
    pub fn steps(&self) -> usize {
        self.lambdas.len()
    }
}

/// Ancilla spectral function a_ω = |Σ_τ λ_τ e^{iτ(ω - πh_A)}|² for a general
/// coupling schedule. Nonnegative and 2π-periodic in ω by construction.
pub fn a_omega(omega: f64, params: &ResetParams) -> f64 {
    let x = omega - PI * params.h_a;
    let mut acc = Complex64::new(0.0, 0.0);
    for (tau, &lambda) in params.lambdas.iter().enumerate() {
        let phase = (tau + 1) as f64 * x;
        acc += Complex64::from_polar(lambda, phase);
    }
    acc.norm_sqr()
}

/// Closed form of [`a_omega`] for a constant schedule λ_τ = λ:
/// a_ω = λ² sin²(Tx/2)/sin²(x/2) with x = ω - πh_A. Near the removable
/// singularity x → 2πm the Taylor limit λ²T²(1 - (T²-1)x²/12) is used.
pub fn a_omega_uniform(omega: f64, h_a: f64, t: usize, lambda: f64) -> f64 {
    let x = omega - PI * h_a;
    let tf = t as f64;
    let half = x / 2.0;
    let s = half.sin();
    if s.abs() < 1e-6 {
        // Distance to the nearest multiple of 2π.
        let xw = x - 2.0 * PI * (x / (2.0 * PI)).round();
        return lambda * lambda * tf * tf * (1.0 - (tf * tf - 1.0) * xw * xw / 12.0);
    }
    let st = (tf * half).sin();
    lambda * lambda * st * st / (s * s)
}

/// Transition kernel g^s_{q,q'} = (1+cos(q+q')) |ũ_{q'}ũ_q - ṽ*_{q'}ṽ_q|².
pub fn kernel_gs(table: &BogoliubovTable, k: usize, kp: usize) -> f64 {
    let (q, qp) = (table.grid.momentum(k), table.grid.momentum(kp));
    let amp = table.u[kp] * table.u[k] - table.v[kp].conj() * table.v[k];
    (1.0 + (q + qp).cos()) * amp.norm_sqr()
}

/// Pair kernel g^{ca}_{q,q'} = (1+cos(q'-q)) |ũ_{q'}ṽ_q - ṽ_{q'}ũ_q|².
pub fn kernel_gca(table: &BogoliubovTable, k: usize, kp: usize) -> f64 {
    let (q, qp) = (table.grid.momentum(k), table.grid.momentum(kp));
    let amp = table.v[k] * table.u[kp] - table.v[kp] * table.u[k];
    (1.0 + (qp - q).cos()) * amp.norm_sqr()
}

/// State-independent kernel matrices g·a for one (table, params) pair, so a
/// cycle-rate evaluation is four matrix-vector products.
#[derive(Debug, Clone)]
pub struct CycleKernel {
    l: usize,
    /// g^s_{q,q'} a_{ε̃_{q'}-ε̃_q}
    gain: Vec<f64>,
    /// g^s_{q,q'} a_{ε̃_q-ε̃_{q'}}
    loss: Vec<f64>,
    /// g^{ca}_{q,q'} a_{-ε̃_{q'}-ε̃_q}
    creation: Vec<f64>,
    /// g^{ca}_{q,q'} a_{ε̃_{q'}+ε̃_q}
    annihilation: Vec<f64>,
}

impl CycleKernel {
    pub fn new(table: &BogoliubovTable, params: &ResetParams) -> Result<Self> {
        if table.params.variant != Variant::Floquet {
            return Err(Error::InvalidParameter(
                "reset-cycle kernels are defined for the Floquet variant".into(),
            ));
        }
        let l = table.len();
        let mut gain = vec![0.0; l * l];
        let mut loss = vec![0.0; l * l];
        let mut creation = vec![0.0; l * l];
        let mut annihilation = vec![0.0; l * l];
        for i in 0..l {
            for j in 0..l {
                let gs = kernel_gs(table, i, j);
                let gca = kernel_gca(table, i, j);
                let (ei, ej) = (table.eps[i], table.eps[j]);
                gain[i * l + j] = gs * a_omega(ej - ei, params);
                loss[i * l + j] = gs * a_omega(ei - ej, params);
                creation[i * l + j] = gca * a_omega(-ej - ei, params);
                annihilation[i * l + j] = gca * a_omega(ej + ei, params);
            }
        }
        Ok(Self {
            l,
            gain,
            loss,
            creation,
            annihilation,
        })
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        self.l == 0
    }
}

/// Occupation change over one reset cycle, Δ⟨n_q⟩.
pub fn cycle_rate(state: &GgeState, kernel: &CycleKernel) -> Result<Vec<f64>> {
    let l = state.len();
    if kernel.l != l {
        return Err(Error::GridMismatch {
            expected: l,
            got: kernel.l,
        });
    }
    let n = state.occupations();
    let m: Vec<f64> = n.iter().map(|x| 1.0 - x).collect();
    let pref = 2.0 / l as f64;
    let row_dot = |mat: &[f64], i: usize, w: &[f64]| -> f64 {
        mat[i * l..(i + 1) * l]
            .iter()
            .zip(w)
            .map(|(a, b)| a * b)
            .sum()
    };
    Ok((0..l)
        .map(|i| {
            pref * (m[i] * row_dot(&kernel.gain, i, n) - n[i] * row_dot(&kernel.loss, i, &m)
                + m[i] * row_dot(&kernel.creation, i, &m)
                - n[i] * row_dot(&kernel.annihilation, i, n))
        })
        .collect())
}

/// Reference evaluation recomputing every kernel entry on the fly.
pub fn cycle_rate_direct(state: &GgeState, params: &ResetParams) -> Vec<f64> {
    let table = &state.table;
    let l = state.len();
    let n = state.occupations();
    let pref = 2.0 / l as f64;
    (0..l)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..l {
                let gs = kernel_gs(table, i, j);
                let gca = kernel_gca(table, i, j);
                let (ei, ej) = (table.eps[i], table.eps[j]);
                acc += gs
                    * ((1.0 - n[i]) * n[j] * a_omega(ej - ei, params)
                        - n[i] * (1.0 - n[j]) * a_omega(ei - ej, params));
                acc += gca
                    * ((1.0 - n[i]) * (1.0 - n[j]) * a_omega(-ej - ei, params)
                        - n[i] * n[j] * a_omega(ej + ei, params));
            }
            pref * acc
        })
        .collect()
}

/// Applies `n_cycles` reset cycles, clamping occupations after each one.
/// The observer fires after every `stride`-th cycle and after the last.
pub fn evolve_cycles(
    state: &mut GgeState,
    kernel: &CycleKernel,
    n_cycles: usize,
    stride: usize,
    mut observer: impl FnMut(&GgeState),
) -> Result<()> {
    let stride = stride.max(1);
    for c in 1..=n_cycles {
        let delta = cycle_rate(state, kernel)?;
        for (n, d) in state.n.iter_mut().zip(&delta) {
            *n = clamp_occupation(*n + d);
        }
        state.clock += 1.0;
        if c % stride == 0 || c == n_cycles {
            observer(state);
        }
    }
    Ok(())
}
