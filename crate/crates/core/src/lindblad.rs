//! Continuous-time scattering theory for the bath of bond operators
//! L_j = S⁺_j S⁻_{j+1} + Sᶻ_j + ½. In the GGE the occupations obey a
//! Boltzmann-like rate equation
//!
//! d⟨n_q⟩/d(εt) = (2/L) Σ_{q'} [ f^s_{q,q'} (1-n_q) n_{q'} - f^s_{q',q} n_q (1-n_{q'})
//!                + f^c_{q,q'} (1-n_q)(1-n_{q'}) - f^a_{q,q'} n_q n_{q'} ],
//!
//! with positive kernels built from the Bogoliubov coefficients. All rates
//! are per scaled time εt, so the coupling strength never appears here.
//!
//! Every kernel factorizes over (q, q') because
//! 1 + cos q' + cos q + cos(q ∓ q') = (1+cos q)(1+cos q') ± sin q sin q',
//! which turns the q' sums into six scalars per weight vector and makes the
//! full rate O(L). [`rate_naive`] keeps the direct O(L²) double sum as the
//! reference route.

use crate::error::{Error, Result};
use crate::gge::{clamp_occupation, GgeState};
use crate::model::{BogoliubovTable, Variant};

/// Transition kernel f^s_{q,q'} evaluated directly from the table.
pub fn kernel_fs(table: &BogoliubovTable, k: usize, kp: usize) -> f64 {
    let (q, qp) = (table.grid.momentum(k), table.grid.momentum(kp));
    let (u, v) = (table.u[k], table.v_real(k));
    let (up, vp) = (table.u[kp], table.v_real(kp));
    u * u * up * up * (1.0 + qp.cos()) + v * v * vp * vp * (1.0 + q.cos())
        - u * v * up * vp * (1.0 + qp.cos() + q.cos() + (q + qp).cos())
}

/// Pair-creation kernel f^c_{q,q'}.
pub fn kernel_fc(table: &BogoliubovTable, k: usize, kp: usize) -> f64 {
    let (q, qp) = (table.grid.momentum(k), table.grid.momentum(kp));
    let (u, v) = (table.u[k], table.v_real(k));
    let (up, vp) = (table.u[kp], table.v_real(kp));
    u * u * vp * vp * (1.0 + qp.cos()) + v * v * up * up * (1.0 + q.cos())
        - u * v * up * vp * (1.0 + qp.cos() + q.cos() + (q - qp).cos())
}

/// Pair-annihilation kernel f^a_{q,q'}.
pub fn kernel_fa(table: &BogoliubovTable, k: usize, kp: usize) -> f64 {
    let (q, qp) = (table.grid.momentum(k), table.grid.momentum(kp));
    let (u, v) = (table.u[k], table.v_real(k));
    let (up, vp) = (table.u[kp], table.v_real(kp));
    u * u * vp * vp * (1.0 + q.cos()) + v * v * up * up * (1.0 + qp.cos())
        - u * v * up * vp * (1.0 + qp.cos() + q.cos() + (q - qp).cos())
}

/// Per-momentum factor arrays that reconstruct all three kernels, so every
/// q' sum in the rate collapses to scalars independent of q.
#[derive(Debug, Clone)]
pub struct FactorizedKernel {
    uu: Vec<f64>,
    vv: Vec<f64>,
    uv: Vec<f64>,
    uu_c: Vec<f64>,
    vv_c: Vec<f64>,
    uv_c: Vec<f64>,
    uv_s: Vec<f64>,
}

/// The six scalar contractions of the factor arrays with a weight vector.
struct Sums {
    uu_c: f64,
    vv: f64,
    uv_c: f64,
    uv_s: f64,
    uu: f64,
    vv_c: f64,
}

impl FactorizedKernel {
    pub fn new(table: &BogoliubovTable) -> Result<Self> {
        if table.params.variant != Variant::ContinuousTime {
            return Err(Error::InvalidParameter(
                "scattering kernels f^s, f^c, f^a are defined for the continuous-time variant"
                    .into(),
            ));
        }
        let l = table.len();
        let mut k = Self {
            uu: Vec::with_capacity(l),
            vv: Vec::with_capacity(l),
            uv: Vec::with_capacity(l),
            uu_c: Vec::with_capacity(l),
            vv_c: Vec::with_capacity(l),
            uv_c: Vec::with_capacity(l),
            uv_s: Vec::with_capacity(l),
        };
        for i in 0..l {
            let q = table.grid.momentum(i);
            let (u, v) = (table.u[i], table.v_real(i));
            let c = 1.0 + q.cos();
            let s = q.sin();
            k.uu.push(u * u);
            k.vv.push(v * v);
            k.uv.push(u * v);
            k.uu_c.push(u * u * c);
            k.vv_c.push(v * v * c);
            k.uv_c.push(u * v * c);
            k.uv_s.push(u * v * s);
        }
        Ok(k)
    }

    pub fn len(&self) -> usize {
        self.uu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uu.is_empty()
    }

    fn sums(&self, weight: &[f64]) -> Sums {
        let dot = |a: &[f64]| a.iter().zip(weight).map(|(x, w)| x * w).sum::<f64>();
        Sums {
            uu_c: dot(&self.uu_c),
            vv: dot(&self.vv),
            uv_c: dot(&self.uv_c),
            uv_s: dot(&self.uv_s),
            uu: dot(&self.uu),
            vv_c: dot(&self.vv_c),
        }
    }

    /// Σ_{q'} f^s_{q,q'} x_{q'} for the weights contracted in `sx`.
    fn gain_s(&self, i: usize, sx: &Sums) -> f64 {
        self.uu[i] * sx.uu_c + self.vv_c[i] * sx.vv - self.uv_c[i] * sx.uv_c
            + self.uv_s[i] * sx.uv_s
    }

    /// Σ_{q'} f^s_{q',q} x_{q'}.
    fn loss_s(&self, i: usize, sx: &Sums) -> f64 {
        self.uu_c[i] * sx.uu + self.vv[i] * sx.vv_c - self.uv_c[i] * sx.uv_c
            + self.uv_s[i] * sx.uv_s
    }

    /// Σ_{q'} f^c_{q,q'} x_{q'}.
    fn creation(&self, i: usize, sx: &Sums) -> f64 {
        self.uu[i] * sx.vv_c + self.vv_c[i] * sx.uu
            - self.uv_c[i] * sx.uv_c
            - self.uv_s[i] * sx.uv_s
    }

    /// Σ_{q'} f^a_{q,q'} x_{q'}.
    fn annihilation(&self, i: usize, sx: &Sums) -> f64 {
        self.uu_c[i] * sx.vv + self.vv[i] * sx.uu_c
            - self.uv_c[i] * sx.uv_c
            - self.uv_s[i] * sx.uv_s
    }
}

/// d⟨n_q⟩/d(εt) for every mode, evaluated in O(L) via the factorized kernel.
pub fn rate(state: &GgeState, kernel: &FactorizedKernel) -> Result<Vec<f64>> {
    let l = state.len();
    if kernel.len() != l {
        return Err(Error::GridMismatch {
            expected: l,
            got: kernel.len(),
        });
    }
    let n = state.occupations();
    let m: Vec<f64> = n.iter().map(|x| 1.0 - x).collect();
    let sn = kernel.sums(n);
    let sm = kernel.sums(&m);
    let pref = 2.0 / l as f64;
    Ok((0..l)
        .map(|i| {
            pref * (m[i] * kernel.gain_s(i, &sn) - n[i] * kernel.loss_s(i, &sm)
                + m[i] * kernel.creation(i, &sm)
                - n[i] * kernel.annihilation(i, &sn))
        })
        .collect())
}

/// Directional derivative of [`rate`] along an occupation perturbation δ,
/// i.e. d/ds rate(n + s δ) at s = 0. Used for analytic Jacobians in the
/// steady-state solvers; the rate is quadratic in n so this is exact.
pub fn rate_directional(state: &GgeState, delta: &[f64], kernel: &FactorizedKernel) -> Vec<f64> {
    let l = state.len();
    let n = state.occupations();
    let m: Vec<f64> = n.iter().map(|x| 1.0 - x).collect();
    let sn = kernel.sums(n);
    let sm = kernel.sums(&m);
    let sd = kernel.sums(delta);
    let pref = 2.0 / l as f64;
    (0..l)
        .map(|i| {
            let diagonal = kernel.gain_s(i, &sn)
                + kernel.loss_s(i, &sm)
                + kernel.creation(i, &sm)
                + kernel.annihilation(i, &sn);
            pref * (-delta[i] * diagonal + m[i] * kernel.gain_s(i, &sd)
                + n[i] * kernel.loss_s(i, &sd)
                - m[i] * kernel.creation(i, &sd)
                - n[i] * kernel.annihilation(i, &sd))
        })
        .collect()
}

/// Reference O(L²) evaluation of the rate from the direct kernel formulas.
pub fn rate_naive(state: &GgeState) -> Vec<f64> {
    let table = &state.table;
    let l = state.len();
    let n = state.occupations();
    let pref = 2.0 / l as f64;
    (0..l)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..l {
                acc += kernel_fs(table, i, j) * (1.0 - n[i]) * n[j]
                    - kernel_fs(table, j, i) * n[i] * (1.0 - n[j])
                    + kernel_fc(table, i, j) * (1.0 - n[i]) * (1.0 - n[j])
                    - kernel_fa(table, i, j) * n[i] * n[j];
            }
            pref * acc
        })
        .collect()
}

/// One explicit Euler step of size `dt_scaled` in scaled time εt.
pub fn euler_step(state: &mut GgeState, dt_scaled: f64, kernel: &FactorizedKernel) -> Result<()> {
    let r = rate(state, kernel)?;
    for (n, r) in state.n.iter_mut().zip(&r) {
        *n = clamp_occupation(*n + dt_scaled * r);
    }
    state.clock += dt_scaled;
    Ok(())
}

/// Repeated Euler stepping until the clock reaches `t_end_scaled`. The
/// observer fires after every `stride`-th step and after the final one.
/// The last step is shortened so the clock lands on `t_end_scaled` exactly.
pub fn evolve(
    state: &mut GgeState,
    kernel: &FactorizedKernel,
    t_end_scaled: f64,
    dt_scaled: f64,
    stride: usize,
    mut observer: impl FnMut(&GgeState),
) -> Result<()> {
    if t_end_scaled < state.clock {
        return Err(Error::InvalidParameter(format!(
            "t_end {t_end_scaled} lies before the current clock {}",
            state.clock
        )));
    }
    if dt_scaled <= 0.0 {
        return Err(Error::InvalidParameter("dt must be positive".into()));
    }
    let stride = stride.max(1);
    let mut step_idx = 0usize;
    loop {
        let remaining = t_end_scaled - state.clock;
        if remaining <= dt_scaled * 1e-9 {
            break;
        }
        let dt = dt_scaled.min(remaining);
        euler_step(state, dt, kernel)?;
        step_idx += 1;
        let done = t_end_scaled - state.clock <= dt_scaled * 1e-9;
        if step_idx.is_multiple_of(stride) || done {
            observer(state);
        }
        if done {
            break;
        }
    }
    Ok(())
}
