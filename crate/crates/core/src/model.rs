//! Momentum grids and the diagonalized quasiparticle representation of the
//! transverse field Ising chain,
//!
//! H = Σ_j J σˣ_j σˣ_{j+1} + h σᶻ_j,
//!
//! in two variants: continuous-time evolution under H itself, and the Floquet
//! (Trotterized) evolution U = exp(-iπJ/2 Σ σˣσˣ) exp(-iπh/2 Σ σᶻ) used by
//! digital processors. Both diagonalize through Jordan-Wigner, Fourier and
//! Bogoliubov transformations; only the even parity sector (anti-periodic
//! fermions, momenta K⁺) is represented.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Which single-particle dispersion the chain is diagonalized for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Hamiltonian evolution: ε_q = 2√(J² + 2hJ cos q + h²).
    ContinuousTime,
    /// Trotterized gates of duration π/2: quasi-energy ε̃_q ∈ [0, π].
    Floquet,
}

/// Ising coupling, transverse field and evolution variant.
#[derive(Debug, Clone, Copy)]
pub struct ModelParams {
    pub j: f64,
    pub h: f64,
    pub variant: Variant,
}

impl ModelParams {
    pub fn new(j: f64, h: f64, variant: Variant) -> Result<Self> {
        if !j.is_finite() || !h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "couplings must be finite, got J = {j}, h = {h}"
            )));
        }
        Ok(Self { j, h, variant })
    }

    pub fn continuous(j: f64, h: f64) -> Result<Self> {
        Self::new(j, h, Variant::ContinuousTime)
    }

    pub fn floquet(j: f64, h: f64) -> Result<Self> {
        Self::new(j, h, Variant::Floquet)
    }
}

/// Even-sector momentum set K⁺ = { 2π(k+½)/L : k = 0..L-1 } on L sites.
///
/// All momenta lie strictly inside (0, 2π); for even L the set avoids q = 0
/// and q = π, so the Bogoliubov rotation is regular everywhere on the grid.
#[derive(Debug, Clone)]
pub struct MomentumGrid {
    l: usize,
    momenta: Vec<f64>,
}

impl MomentumGrid {
    /// Builds the even-sector grid for a chain of `l` sites.
    pub fn even_sector(l: usize) -> Result<Self> {
        if l < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 sites, got {l}"
            )));
        }
        let momenta = (0..l)
            .map(|k| 2.0 * PI * (k as f64 + 0.5) / l as f64)
            .collect();
        Ok(Self { l, momenta })
    }

    pub fn len(&self) -> usize {
        self.l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn momentum(&self, k: usize) -> f64 {
        self.momenta[k]
    }

    /// Index of the inverted momentum 2π - q_k, which is again on the grid.
    pub fn inverted_index(&self, k: usize) -> usize {
        self.l - 1 - k
    }

    /// Index of q_k + π (mod 2π). Only defined for even L.
    pub fn shifted_by_pi_index(&self, k: usize) -> Result<usize> {
        if !self.l.is_multiple_of(2) {
            return Err(Error::InvalidParameter(
                "momentum shift by π needs even L".into(),
            ));
        }
        Ok((k + self.l / 2) % self.l)
    }
}

/// Per-momentum dispersion and Bogoliubov coefficients.
///
/// `u` is real and nonnegative in both variants; any complex phase sits in
/// `v` (it is purely real for the continuous-time variant). `e0` is the
/// quasiparticle-vacuum energy -½ Σ_q ε_q.
#[derive(Debug, Clone)]
pub struct BogoliubovTable {
    pub params: ModelParams,
    pub grid: MomentumGrid,
    pub eps: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<Complex64>,
    pub e0: f64,
}

/// Coefficients at one momentum. Separated out so tests can probe momenta
/// that are not on any even-L grid (q = 0, q = π).
#[derive(Debug, Clone, Copy)]
pub struct ModeCoefficients {
    pub eps: f64,
    pub u: f64,
    pub v: Complex64,
}

const GAP_TOL: f64 = 1e-12;

/// Continuous-time dispersion and rotation at momentum `q`:
/// a_q = 2(J cos q + h), b_q = -2J sin q, ε_q = √(a_q² + b_q²).
pub fn continuous_mode(j: f64, h: f64, q: f64) -> Result<ModeCoefficients> {
    let a = 2.0 * (j * q.cos() + h);
    let b = -2.0 * j * q.sin();
    let eps = 2.0 * (j * j + 2.0 * h * j * q.cos() + h * h).sqrt();
    if eps <= GAP_TOL {
        return Err(Error::GaplessMode { q });
    }
    let (u, v) = bogoliubov_uv(a, b, 0.0, eps);
    Ok(ModeCoefficients { eps, u, v })
}

/// Floquet quasi-energy and generalized rotation at momentum `q`:
/// cos ε̃_q = cos πJ cos πh - sin πJ sin πh cos q on the branch [0, π].
pub fn floquet_mode(j: f64, h: f64, q: f64) -> Result<ModeCoefficients> {
    let (pj, ph) = (PI * j, PI * h);
    let cos_eps = pj.cos() * ph.cos() - pj.sin() * ph.sin() * q.cos();
    let a = pj.sin() * ph.cos() * q.cos() + pj.cos() * ph.sin();
    let b = -Complex64::new(0.0, -ph).exp() * pj.sin() * q.sin();
    let xi = (a * a + b.norm_sqr()).sqrt();
    if xi <= GAP_TOL {
        return Err(Error::GaplessMode { q });
    }
    let eps = cos_eps.clamp(-1.0, 1.0).acos();
    let (u, v) = bogoliubov_uv(a, b.re, b.im, xi);
    Ok(ModeCoefficients { eps, u, v })
}

/// Shared (u, v) construction. `xi` is the Bogoliubov normalization
/// (ε_q in continuous time, ξ_q = sin ε̃_q for Floquet) and `a` its diagonal
/// part: u = (ξ+a)/√(2ξ(ξ+a)), v = b/√(2ξ(ξ+a)). At the singular locus
/// b = 0 the limits are (u, v) = (1, 0) for a > 0 and (0, 1) for a < 0.
/// For a < 0 the sum ξ + a is rewritten as |b|²/(ξ - a) to avoid
/// cancellation near that locus.
fn bogoliubov_uv(a: f64, b_re: f64, b_im: f64, xi: f64) -> (f64, Complex64) {
    let b_sqr = b_re * b_re + b_im * b_im;
    if b_sqr == 0.0 {
        return if a > 0.0 {
            (1.0, Complex64::new(0.0, 0.0))
        } else {
            (0.0, Complex64::new(1.0, 0.0))
        };
    }
    let xi_plus_a = if a >= 0.0 { xi + a } else { b_sqr / (xi - a) };
    let denom = (2.0 * xi * xi_plus_a).sqrt();
    (
        xi_plus_a / denom,
        Complex64::new(b_re / denom, b_im / denom),
    )
}

impl BogoliubovTable {
    /// Diagonalizes the chain on `grid` for the variant in `params`.
    pub fn build(params: ModelParams, grid: MomentumGrid) -> Result<Self> {
        let l = grid.len();
        let mut eps = Vec::with_capacity(l);
        let mut u = Vec::with_capacity(l);
        let mut v = Vec::with_capacity(l);
        for &q in grid.momenta() {
            let m = match params.variant {
                Variant::ContinuousTime => continuous_mode(params.j, params.h, q)?,
                Variant::Floquet => floquet_mode(params.j, params.h, q)?,
            };
            eps.push(m.eps);
            u.push(m.u);
            v.push(m.v);
        }
        let e0 = -0.5 * eps.iter().sum::<f64>();
        Ok(Self {
            params,
            grid,
            eps,
            u,
            v,
            e0,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Real part of v; valid for the continuous-time variant where v is real.
    pub fn v_real(&self, k: usize) -> f64 {
        debug_assert!(self.params.variant == Variant::ContinuousTime);
        self.v[k].re
    }
}

/// The pair of 2×2 blocks whose product e^{-iX_q} e^{-iZ_q} carries the
/// Floquet single-particle evolution in the (c_q, c_{-q}†) bispinor basis.
pub fn floquet_block(
    params: &ModelParams,
    q: f64,
) -> (nalgebra::Matrix2<Complex64>, nalgebra::Matrix2<Complex64>) {
    let r = |x: f64| Complex64::new(x, 0.0);
    let (pj, ph) = (PI * params.j, PI * params.h);
    let x = nalgebra::Matrix2::new(
        r(pj * q.cos()),
        r(-pj * q.sin()),
        r(-pj * q.sin()),
        r(-pj * q.cos()),
    );
    let z = nalgebra::Matrix2::new(r(ph), r(0.0), r(0.0), r(-ph));
    (x, z)
}

/// Which local conserved charge a coefficient set represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChargeParity {
    Even,
    Odd,
}

/// Momentum-space coefficients of the local conserved charge C_i,
/// C_i = Σ_q c_q^{(i)} n_q: even charges C_{2ℓ} have c_q = cos(qℓ) ε_q
/// (C_0 = H_0), odd charges C_{2ℓ-1} have c_q = 2J sin(qℓ).
#[derive(Debug, Clone)]
pub struct ChargeCoefficients {
    pub index: usize,
    pub parity: ChargeParity,
    pub coeffs: Vec<f64>,
    pub(crate) grid_len: usize,
}

pub fn charge_coefficients(table: &BogoliubovTable, index: usize) -> ChargeCoefficients {
    let momenta = table.grid.momenta();
    let (parity, coeffs): (ChargeParity, Vec<f64>) = if index == 0 {
        (ChargeParity::Even, table.eps.clone())
    } else if index % 2 == 1 {
        let ell = index.div_ceil(2);
        (
            ChargeParity::Odd,
            momenta
                .iter()
                .map(|q| 2.0 * table.params.j * (q * ell as f64).sin())
                .collect(),
        )
    } else {
        let ell = index / 2;
        (
            ChargeParity::Even,
            momenta
                .iter()
                .zip(&table.eps)
                .map(|(q, eps)| (q * ell as f64).cos() * eps)
                .collect(),
        )
    };
    ChargeCoefficients {
        index,
        parity,
        coeffs,
        grid_len: table.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn params_must_be_finite() {
        assert!(ModelParams::continuous(f64::NAN, 0.5).is_err());
        assert!(ModelParams::continuous(1.0, f64::INFINITY).is_err());
        assert!(ModelParams::floquet(0.8, 0.45).is_ok());
    }

    #[test]
    fn grid_small_sizes() {
        let g = MomentumGrid::even_sector(2).unwrap();
        assert_eq!(g.momenta(), &[PI / 2.0, 3.0 * PI / 2.0]);
        let g = MomentumGrid::even_sector(4).unwrap();
        let expect = [PI / 4.0, 3.0 * PI / 4.0, 5.0 * PI / 4.0, 7.0 * PI / 4.0];
        for (a, b) in g.momenta().iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(MomentumGrid::even_sector(1).is_err());
        assert!(MomentumGrid::even_sector(0).is_err());
    }

    #[test]
    fn grid_large_is_well_formed() {
        let l = 100_000;
        let g = MomentumGrid::even_sector(l).unwrap();
        assert_eq!(g.len(), l);
        assert!((g.momentum(0) - PI / l as f64).abs() < 1e-18);
        for k in 0..l {
            let q = g.momentum(k);
            assert!(q > 0.0 && q < 2.0 * PI);
            if k > 0 {
                assert!(q > g.momentum(k - 1));
            }
        }
    }

    #[test]
    fn grid_index_maps() {
        let g = MomentumGrid::even_sector(8).unwrap();
        for k in 0..8 {
            let qi = g.momentum(g.inverted_index(k));
            assert!((qi - (2.0 * PI - g.momentum(k))).abs() < 1e-14);
            let qs = g.momentum(g.shifted_by_pi_index(k).unwrap());
            let diff = (qs - g.momentum(k)).rem_euclid(2.0 * PI);
            assert!((diff - PI).abs() < 1e-14);
        }
    }

    #[test]
    fn continuous_mode_singular_locus_and_gap() {
        // q = 0 sits on the b = 0 locus with a > 0.
        let m = continuous_mode(1.0, 0.6, 0.0).unwrap();
        assert!((m.eps - 3.2).abs() < 1e-14);
        assert_eq!(m.u, 1.0);
        assert_eq!(m.v, Complex64::new(0.0, 0.0));
        // a < 0 side of the locus: sin(π) is only zero to machine precision,
        // so the cancellation-free branch must land on the (0, 1) limit.
        let m = continuous_mode(1.0, 0.6, PI).unwrap();
        assert!((m.eps - 0.8).abs() < 1e-14);
        assert!(m.u.abs() < 1e-15);
        assert!((m.v.norm() - 1.0).abs() < 1e-15);
        // Critical point J = h is gapless at q = π.
        assert!(matches!(
            continuous_mode(1.0, 1.0, PI),
            Err(Error::GaplessMode { .. })
        ));
        // Exact b = 0 with a < 0 (reachable in the Floquet variant at J = 0,
        // where sin(πJ) vanishes identically): limit rule gives (0, 1).
        let m = floquet_mode(0.0, 1.5, 1.0).unwrap();
        assert_eq!(m.u, 0.0);
        assert_eq!(m.v, Complex64::new(1.0, 0.0));
        assert!((m.eps - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn continuous_mode_identities_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let j = rng.gen_range(0.1..2.0);
            let h = rng.gen_range(0.1..2.0);
            let q = rng.gen_range(0.01..2.0 * PI - 0.01);
            let m = match continuous_mode(j, h, q) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let a = 2.0 * (j * q.cos() + h);
            let b = -2.0 * j * q.sin();
            assert!((m.eps * m.eps - (a * a + b * b)).abs() < 1e-10 * m.eps * m.eps);
            assert!((m.u * m.u + m.v.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(m.v.im == 0.0);
        }
    }

    #[test]
    fn floquet_mode_edge_momenta() {
        // cos ε̃ reduces to cos(π(J+h)) at q = 0 and cos(π(J-h)) at q = π.
        let m = floquet_mode(0.8, 0.45, 0.0).unwrap();
        assert!((m.eps - 0.75 * PI).abs() < 1e-12);
        let m = floquet_mode(0.8, 0.45, PI).unwrap();
        assert!((m.eps - 0.35 * PI).abs() < 1e-12);
    }

    #[test]
    fn tables_satisfy_invariants() {
        for (params, lo, hi) in [
            (ModelParams::continuous(1.0, 0.6).unwrap(), 0.8, 3.2),
            (ModelParams::floquet(0.8, 0.45).unwrap(), 0.0, PI),
        ] {
            let grid = MomentumGrid::even_sector(64).unwrap();
            let table = BogoliubovTable::build(params, grid).unwrap();
            let mut eps_sum = 0.0;
            for k in 0..table.len() {
                let norm = table.u[k] * table.u[k] + table.v[k].norm_sqr();
                assert!((norm - 1.0).abs() < 1e-12);
                assert!(table.u[k] >= 0.0);
                let ki = table.grid.inverted_index(k);
                assert!((table.eps[k] - table.eps[ki]).abs() < 1e-12);
                assert!(table.eps[k] >= lo - 1e-12 && table.eps[k] <= hi + 1e-12);
                eps_sum += table.eps[k];
            }
            assert!((table.e0 + 0.5 * eps_sum).abs() < 1e-12);
            if params.variant == Variant::ContinuousTime {
                for k in 0..table.len() {
                    assert_eq!(table.v[k].im, 0.0);
                }
            }
        }
    }

    #[test]
    fn floquet_block_special_points() {
        let params = ModelParams::floquet(0.8, 0.45).unwrap();
        let (x, z) = floquet_block(&params, 0.0);
        assert!((x[(0, 0)].re - PI * 0.8).abs() < 1e-15);
        assert!(x[(0, 1)].norm() < 1e-15);
        let (x, _) = floquet_block(&params, PI / 2.0);
        assert!(x[(0, 0)].norm() < 1e-12);
        assert!((x[(0, 1)].re + PI * 0.8).abs() < 1e-12);
        // Hermitian and traceless for arbitrary momentum.
        let (x, z2) = floquet_block(&params, 1.234);
        for m in [x, z, z2] {
            assert!((m - m.adjoint()).norm() < 1e-15);
            assert!(m.trace().norm() < 1e-15);
        }
    }

    /// Plain scaled Taylor series for the 2×2 matrix exponential; kept free
    /// of the trigonometric identities the closed-form dispersion uses.
    fn expm2(m: Matrix2<Complex64>) -> Matrix2<Complex64> {
        let norm = m.norm();
        let s = (norm.log2().ceil().max(0.0)) as usize + 1;
        let scaled = m / Complex64::new((1u64 << s) as f64, 0.0);
        let mut term = Matrix2::identity();
        let mut sum = Matrix2::identity();
        for k in 1..30 {
            term = (term * scaled) / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn floquet_dispersion_matches_block_eigenphases() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mi = Complex64::new(0.0, -1.0);
        for _ in 0..100 {
            let j = rng.gen_range(0.05..1.95);
            let h = rng.gen_range(0.05..1.95);
            let q = rng.gen_range(0.01..2.0 * PI - 0.01);
            let mode = match floquet_mode(j, h, q) {
                Ok(m) => m,
                Err(_) => continue,
            };
            let params = ModelParams::floquet(j, h).unwrap();
            let (x, z) = floquet_block(&params, q);
            let block = expm2(x * mi) * expm2(z * mi);
            // Eigenvalues from the quadratic formula; phases are ±ε̃.
            let tr = block.trace();
            let det = block.determinant();
            let disc = (tr * tr - det * 4.0).sqrt();
            let l1 = (tr + disc) * 0.5;
            let l2 = (tr - disc) * 0.5;
            assert!((l1.norm() - 1.0).abs() < 1e-12);
            assert!((l1.arg().abs() - mode.eps).abs() < 1e-12);
            assert!((l2.arg().abs() - mode.eps).abs() < 1e-12);
        }
    }

    #[test]
    fn charge_coefficient_families() {
        let params = ModelParams::continuous(1.0, 0.6).unwrap();
        let grid = MomentumGrid::even_sector(16).unwrap();
        let table = BogoliubovTable::build(params, grid).unwrap();
        let c0 = charge_coefficients(&table, 0);
        assert_eq!(c0.parity, ChargeParity::Even);
        assert_eq!(c0.coeffs, table.eps);
        let c1 = charge_coefficients(&table, 1);
        assert_eq!(c1.parity, ChargeParity::Odd);
        let c2 = charge_coefficients(&table, 2);
        for (k, &q) in table.grid.momenta().iter().enumerate() {
            assert!((c1.coeffs[k] - 2.0 * q.sin()).abs() < 1e-14);
            assert!((c2.coeffs[k] - q.cos() * table.eps[k]).abs() < 1e-14);
        }
    }
}
