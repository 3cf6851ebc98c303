//! Time-dependent generalized Gibbs ensemble over the quasiparticle mode
//! occupations, and every observable evaluated in it: occupations and
//! Lagrange multipliers, susceptibilities, conserved-charge expectations,
//! string correlators and correlation-length fits.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{BogoliubovTable, ChargeCoefficients, ChargeParity};

/// Occupations are clamped to [δ, 1-δ] so that μ_q = ln((1-n_q)/n_q) stays
/// finite; the quasiparticle vacuum is represented as n_q = δ.
pub const OCCUPATION_CLAMP: f64 = 1e-12;

pub fn clamp_occupation(n: f64) -> f64 {
    n.clamp(OCCUPATION_CLAMP, 1.0 - OCCUPATION_CLAMP)
}

/// ⟨n_q⟩ = e^{-μ_q}/(1 + e^{-μ_q}) for each multiplier, clamped. Evaluated
/// on the non-overflowing branch of the logistic for either sign of μ.
pub fn occupations_from_multipliers(mu: &[f64]) -> Vec<f64> {
    mu.iter()
        .map(|&m| {
            let n = if m >= 0.0 {
                let e = (-m).exp();
                e / (1.0 + e)
            } else {
                1.0 / (1.0 + m.exp())
            };
            clamp_occupation(n)
        })
        .collect()
}

/// Inverse of [`occupations_from_multipliers`] for a single mode.
pub fn multiplier_from_occupation(n: f64) -> f64 {
    ((1.0 - n) / n).ln()
}

/// GGE state: per-momentum occupations plus the elapsed scaled time
/// (continuous-time variant) or cycle count (Floquet variant).
#[derive(Debug, Clone)]
pub struct GgeState {
    pub table: Arc<BogoliubovTable>,
    pub(crate) n: Vec<f64>,
    pub clock: f64,
}

impl GgeState {
    pub fn from_occupations(table: Arc<BogoliubovTable>, n: Vec<f64>) -> Result<Self> {
        if n.len() != table.len() {
            return Err(Error::GridMismatch {
                expected: table.len(),
                got: n.len(),
            });
        }
        let n = n.into_iter().map(clamp_occupation).collect();
        Ok(Self {
            table,
            n,
            clock: 0.0,
        })
    }

    pub fn from_multipliers(table: Arc<BogoliubovTable>, mu: &[f64]) -> Result<Self> {
        Self::from_occupations(table, occupations_from_multipliers(mu))
    }

    /// μ_q = 0 for every mode.
    pub fn infinite_temperature(table: Arc<BogoliubovTable>) -> Self {
        let n = vec![0.5; table.len()];
        Self {
            table,
            n,
            clock: 0.0,
        }
    }

    /// μ_q = β ε_q.
    pub fn thermal(table: Arc<BogoliubovTable>, beta: f64) -> Self {
        let mu: Vec<f64> = table.eps.iter().map(|&e| beta * e).collect();
        let n = occupations_from_multipliers(&mu);
        Self {
            table,
            n,
            clock: 0.0,
        }
    }

    /// Quasiparticle vacuum, n_q = δ.
    pub fn ground(table: Arc<BogoliubovTable>) -> Self {
        let n = vec![OCCUPATION_CLAMP; table.len()];
        Self {
            table,
            n,
            clock: 0.0,
        }
    }

    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn occupations(&self) -> &[f64] {
        &self.n
    }

    /// Replaces the occupations, clamping into the admissible range.
    pub fn set_occupations(&mut self, n: &[f64]) -> Result<()> {
        if n.len() != self.n.len() {
            return Err(Error::GridMismatch {
                expected: self.n.len(),
                got: n.len(),
            });
        }
        for (dst, &src) in self.n.iter_mut().zip(n) {
            *dst = clamp_occupation(src);
        }
        Ok(())
    }

    pub fn multipliers(&self) -> Vec<f64> {
        self.n.iter().map(|&n| multiplier_from_occupation(n)).collect()
    }

    /// Diagonal susceptibility χ_qq = n_q (1 - n_q).
    pub fn susceptibility(&self) -> Vec<f64> {
        self.n.iter().map(|&n| n * (1.0 - n)).collect()
    }
}

/// Expectation value of a local conserved charge, per site. Even charges are
/// reported relative to their infinite-temperature value (n_q = ½); odd
/// charges need no subtraction since sin(qℓ) sums to zero over the grid.
pub fn charge_expectation(state: &GgeState, charge: &ChargeCoefficients) -> Result<f64> {
    if charge.grid_len != state.len() {
        return Err(Error::GridMismatch {
            expected: state.len(),
            got: charge.grid_len,
        });
    }
    let l = state.len() as f64;
    let sum: f64 = match charge.parity {
        ChargeParity::Even => charge
            .coeffs
            .iter()
            .zip(&state.n)
            .map(|(c, n)| c * (n - 0.5))
            .sum(),
        ChargeParity::Odd => charge.coeffs.iter().zip(&state.n).map(|(c, n)| c * n).sum(),
    };
    Ok(sum / l)
}

/// Which two-point string correlator S^{αα}_{i,i+ℓ} to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelatorKind {
    Xx,
    Yy,
}

/// ⟨S^{αα}_{i,i+ℓ}⟩ for ℓ = 1..ℓ_max in a fixed state.
#[derive(Debug, Clone)]
pub struct CorrelatorSeries {
    pub kind: CorrelatorKind,
    pub values: Vec<f64>,
}

impl CorrelatorSeries {
    /// Value at separation ℓ (1-based).
    pub fn at(&self, ell: usize) -> f64 {
        self.values[ell - 1]
    }

    pub fn ell_max(&self) -> usize {
        self.values.len()
    }
}

/// ⟨σ^α_i σ^z_{i+1} … σ^z_{i+ℓ-1} σ^α_{i+ℓ}⟩ in the GGE.
///
/// With the full σᶻ string both correlators reduce to single fermion
/// bilinears: S^{xx}_{i,i+ℓ} = (-1)^{ℓ-1} B_i A_{i+ℓ} and
/// S^{yy}_{i,i+ℓ} = (-1)^ℓ A_i B_{i+ℓ}, with Majoranas A_j = c_j† + c_j,
/// B_j = c_j† - c_j. Their GGE contraction is a single momentum sum over
/// ν_q = u_q²⟨n_q⟩ + |v_q|²(1-⟨n_{-q}⟩) and κ_q = u_q v_q*(1-⟨n_q⟩-⟨n_{-q}⟩),
/// so the evaluation is O(L) and manifestly i-independent.
pub fn string_correlator(state: &GgeState, kind: CorrelatorKind, ell: usize) -> Result<f64> {
    let l = state.len();
    if ell < 1 || ell > l / 2 {
        return Err(Error::EllOutOfRange { ell, max: l / 2 });
    }
    let m = match kind {
        CorrelatorKind::Xx => ell as f64,
        CorrelatorKind::Yy => -(ell as f64),
    };
    let sign = if ell % 2 == 1 { 1.0 } else { -1.0 };
    Ok(sign * majorana_two_point(state, m))
}

/// ⟨B_i A_{i+m}⟩ for integer separation m ≠ 0 (mod L).
fn majorana_two_point(state: &GgeState, m: f64) -> f64 {
    let table = &state.table;
    let l = state.len();
    let mut sum = 0.0;
    for k in 0..l {
        let q = table.grid.momentum(k);
        let ki = table.grid.inverted_index(k);
        let u = table.u[k];
        let v = table.v[k];
        let nu = u * u * state.n[k] + v.norm_sqr() * (1.0 - state.n[ki]);
        let kappa = v.conj() * u * (1.0 - state.n[k] - state.n[ki]);
        let (s, c) = (q * m).sin_cos();
        sum += c * (nu - kappa.im) + s * kappa.re;
    }
    2.0 * sum / l as f64
}

/// Evaluates the correlator for every separation 1..=ell_max.
pub fn correlator_series(
    state: &GgeState,
    kind: CorrelatorKind,
    ell_max: usize,
) -> Result<CorrelatorSeries> {
    let values = (1..=ell_max)
        .map(|ell| string_correlator(state, kind, ell))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CorrelatorSeries { kind, values })
}

/// Points with |value| below this are treated as numerical noise and
/// excluded from correlation-length fits.
pub const FIT_NOISE_FLOOR: f64 = 1e-12;

/// Default fit window ℓ ∈ [2, 20].
pub const DEFAULT_FIT_WINDOW: (usize, usize) = (2, 20);

/// Least-squares fit of ln|value| against ℓ over [ell_min, ell_max];
/// returns ξ = -1/slope. Fails with fewer than 3 usable points or a
/// non-negative slope.
pub fn fit_correlation_length(
    series: &CorrelatorSeries,
    ell_min: usize,
    ell_max: usize,
) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ell in ell_min..=ell_max.min(series.ell_max()) {
        let v = series.at(ell).abs();
        if v > FIT_NOISE_FLOOR {
            xs.push(ell as f64);
            ys.push(v.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewFitPoints { found: xs.len() });
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    if slope >= 0.0 {
        return Err(Error::NonNegativeSlope { slope });
    }
    Ok(-1.0 / slope)
}
