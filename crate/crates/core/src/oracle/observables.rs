//! Exact observable evaluation on dense states: Jordan-Wigner fermion
//! operators, momentum-space and Bogoliubov quasiparticle operators, dense
//! GGE and thermal state construction, string operators and the fermion
//! parity projector.
//!
//! Conventions: spin-up (σᶻ = +1, bit 0) is the occupied fermion state,
//! σ⁺_j = e^{iπ Σ_{l<j} n_l} c_j†, and the momentum transform is
//! c_j = e^{-iπ/4}/√L Σ_q e^{iqj} c_q over the even-sector grid K⁺.

use num_complex::Complex64;
use std::f64::consts::FRAC_PI_4;

use super::ops::{c, expectation, hermitian_exp, op_on_sites, pauli_x, pauli_y, pauli_z,
    sigma_minus, trace, CMat};
use crate::error::{Error, Result};
use crate::gge::CorrelatorKind;
use crate::model::BogoliubovTable;

/// Position-space annihilation operators c_j = (Π_{l<j} -σᶻ_l) σ⁻_j.
pub fn annihilation_ops(l: usize) -> Vec<CMat> {
    let z = pauli_z();
    let sm = sigma_minus();
    (0..l)
        .map(|j| {
            let mut factors: Vec<(usize, &CMat)> = (0..j).map(|site| (site, &z)).collect();
            factors.push((j, &sm));
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            op_on_sites(l, &factors) * c(sign)
        })
        .collect()
}

/// Momentum-space annihilation operators on the grid of `table`,
/// c_q = e^{iπ/4}/√L Σ_j e^{-iqj} c_j.
pub fn momentum_ops(table: &BogoliubovTable, position_ops: &[CMat]) -> Vec<CMat> {
    let l = position_ops.len();
    let dim = position_ops[0].nrows();
    let norm = 1.0 / (l as f64).sqrt();
    table
        .grid
        .momenta()
        .iter()
        .map(|&q| {
            let mut acc = CMat::zeros(dim, dim);
            for (j, cj) in position_ops.iter().enumerate() {
                let phase = Complex64::from_polar(norm, FRAC_PI_4 - q * j as f64);
                acc += cj * phase;
            }
            acc
        })
        .collect()
}

/// Quasiparticle occupation operators n_q = d_q† d_q with
/// d_q = u_q c_q + v_q* c_{-q}†.
pub fn occupation_ops(table: &BogoliubovTable) -> Vec<CMat> {
    let l = table.len();
    let cq = momentum_ops(table, &annihilation_ops(l));
    (0..l)
        .map(|k| {
            let ki = table.grid.inverted_index(k);
            let d = &cq[k] * c(table.u[k]) + cq[ki].adjoint() * table.v[k].conj();
            d.adjoint() * d
        })
        .collect()
}

/// ⟨n_q⟩ for every mode of `table` in the dense state `rho`.
pub fn mode_occupations_exact(rho: &CMat, table: &BogoliubovTable) -> Result<Vec<f64>> {
    let dim = 1usize << table.len();
    if rho.nrows() != dim {
        return Err(Error::DimensionMismatch(format!(
            "state dimension {} does not match 2^L = {dim}",
            rho.nrows()
        )));
    }
    Ok(occupation_ops(table)
        .iter()
        .map(|n| expectation(n, rho))
        .collect())
}

/// Dense GGE state exp(-Σ_q μ_q n_q)/Z on the full 2^L space.
pub fn dense_gge(table: &BogoliubovTable, mu: &[f64]) -> Result<CMat> {
    if mu.len() != table.len() {
        return Err(Error::GridMismatch {
            expected: table.len(),
            got: mu.len(),
        });
    }
    let dim = 1usize << table.len();
    let mut gen = CMat::zeros(dim, dim);
    for (op, &m) in occupation_ops(table).iter().zip(mu) {
        gen += op * c(-m);
    }
    let rho = hermitian_exp(&gen);
    let z = trace(&rho).re;
    Ok(rho / c(z))
}

/// exp(-βH)/Z by dense eigendecomposition.
pub fn thermal_state(hamiltonian: &CMat, beta: f64) -> CMat {
    let rho = hermitian_exp(&(hamiltonian * c(-beta)));
    let z = trace(&rho).re;
    rho / c(z)
}

/// String operator S^{αα}_{i,i+ℓ} = σ^α_i σᶻ_{i+1} … σᶻ_{i+ℓ-1} σ^α_{i+ℓ}
/// on `l` sites without boundary wraparound (i + ℓ < l).
pub fn string_op(l: usize, kind: CorrelatorKind, i: usize, ell: usize) -> Result<CMat> {
    if ell == 0 || i + ell >= l {
        return Err(Error::EllOutOfRange { ell, max: l - i - 1 });
    }
    let end = match kind {
        CorrelatorKind::Xx => pauli_x(),
        CorrelatorKind::Yy => pauli_y(),
    };
    let z = pauli_z();
    let mut factors: Vec<(usize, &CMat)> = vec![(i, &end)];
    for site in i + 1..i + ell {
        factors.push((site, &z));
    }
    factors.push((i + ell, &end));
    Ok(op_on_sites(l, &factors))
}

/// Fermion parity Π = Π_j (-σᶻ_j).
pub fn parity_op(l: usize) -> CMat {
    let z = pauli_z();
    let factors: Vec<(usize, &CMat)> = (0..l).map(|site| (site, &z)).collect();
    let sign = if l.is_multiple_of(2) { 1.0 } else { -1.0 };
    op_on_sites(l, &factors) * c(sign)
}

/// Projects onto the even-parity sector and renormalizes the trace.
pub fn project_even_parity(rho: &CMat) -> CMat {
    let l = (rho.nrows() as f64).log2().round() as usize;
    let dim = rho.nrows();
    let p = (parity_op(l) + CMat::identity(dim, dim)) * c(0.5);
    let projected = &p * rho * &p;
    let z = trace(&projected).re;
    projected / c(z)
}
