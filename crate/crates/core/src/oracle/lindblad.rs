//! Dense Lindblad integration on short chains: the full master equation
//! dρ/dt = -i[H, ρ] + ε Σ_j (L_j ρ L_j† - ½{L_j†L_j, ρ}) integrated with
//! classical RK4, Hermitian symmetrization after every step, and a hard
//! trace-drift guard.

use num_complex::Complex64;

use super::ops::{c, hermitize, op_on_sites, pauli_x, pauli_z, sigma_minus, sigma_plus, trace,
    CMat, SparseOp, I};
use crate::error::{Error, Result};

/// Σ_j J σˣ_j σˣ_{j+1} + h σᶻ_j with a periodic wraparound bond.
pub fn build_tfim_dense(j: f64, h: f64, l: usize) -> Result<CMat> {
    if !(2..=12).contains(&l) {
        return Err(Error::InvalidParameter(format!(
            "dense oracle supports 2 <= L <= 12 sites, got {l}"
        )));
    }
    let dim = 1 << l;
    let mut ham = CMat::zeros(dim, dim);
    let x = pauli_x();
    let z = pauli_z();
    for site in 0..l {
        ham += op_on_sites(l, &[(site, &x), ((site + 1) % l, &x)]) * c(j);
        ham += op_on_sites(l, &[(site, &z)]) * c(h);
    }
    Ok(ham)
}

/// Bond jump operators L_j = S⁺_j S⁻_{j+1} + Sᶻ_j + ½, one per site (PBC).
pub fn jump_ops(l: usize) -> Vec<CMat> {
    let dim = 1 << l;
    let (sp, sm, z) = (sigma_plus(), sigma_minus(), pauli_z());
    (0..l)
        .map(|site| {
            let hop = op_on_sites(l, &[(site, &sp), ((site + 1) % l, &sm)]);
            let diag = op_on_sites(l, &[(site, &z)]) * c(0.5) + CMat::identity(dim, dim) * c(0.5);
            hop + diag
        })
        .collect()
}

/// Even-sector lift of the jump operators: the fermionized bonds
/// L_j = c†_j c_{j+1} + n_j with anti-periodic closure c_L = -c_0. These
/// coincide with [`jump_ops`] on even-parity states and match the K⁺
/// momentum grid globally, which makes GGE identities exact on the full
/// space.
pub fn jump_ops_even_sector(l: usize) -> Vec<CMat> {
    let cs = super::observables::annihilation_ops(l);
    (0..l)
        .map(|site| {
            let next = if site + 1 == l {
                -cs[0].clone()
            } else {
                cs[site + 1].clone()
            };
            cs[site].adjoint() * next + cs[site].adjoint() * &cs[site]
        })
        .collect()
}

/// Hamiltonian, jump operators and coupling strength of one dense model.
pub struct LindbladSpec {
    pub hamiltonian: CMat,
    pub jumps: Vec<CMat>,
    pub epsilon: f64,
}

impl LindbladSpec {
    pub fn tfim(j: f64, h: f64, l: usize, epsilon: f64) -> Result<Self> {
        Ok(Self {
            hamiltonian: build_tfim_dense(j, h, l)?,
            jumps: jump_ops(l),
            epsilon,
        })
    }

    /// Even-sector lift: H = Σ_q ε_q (n_q - ½) built from the quasiparticle
    /// operators of `table`, with the anti-periodic jump operators.
    pub fn tfim_even_sector(table: &crate::model::BogoliubovTable, epsilon: f64) -> Result<Self> {
        let l = table.len();
        if !(2..=12).contains(&l) {
            return Err(Error::InvalidParameter(format!(
                "dense oracle supports 2 <= L <= 12 sites, got {l}"
            )));
        }
        let dim = 1usize << l;
        let mut hamiltonian = CMat::zeros(dim, dim);
        for (k, op) in super::observables::occupation_ops(table).iter().enumerate() {
            hamiltonian += (op - CMat::identity(dim, dim) * c(0.5)) * c(table.eps[k]);
        }
        Ok(Self {
            hamiltonian,
            jumps: jump_ops_even_sector(l),
            epsilon,
        })
    }

    /// Dissipator alone: ε Σ_j (L_j ρ L_j† - ½{L_j†L_j, ρ}).
    pub fn dissipator(&self, rho: &CMat) -> CMat {
        let n = rho.nrows();
        let mut out = CMat::zeros(n, n);
        for l in &self.jumps {
            let ld = l.adjoint();
            let g = &ld * l;
            out += l * rho * &ld;
            out -= (&g * rho + rho * &g) * c(0.5);
        }
        out * c(self.epsilon)
    }
}

/// Sparse-operator RK4 integrator for one [`LindbladSpec`].
pub struct LindbladPropagator {
    dim: usize,
    h: SparseOp,
    jumps: Vec<(SparseOp, SparseOp)>,
    /// Σ_j L_j†L_j, pre-summed.
    g_total: SparseOp,
    epsilon: f64,
    // Scratch space for the four RK4 stages.
    k: [CMat; 4],
    tmp: CMat,
    stage: CMat,
}

impl LindbladPropagator {
    pub fn new(spec: &LindbladSpec) -> Self {
        let dim = spec.hamiltonian.nrows();
        let mut g_total = CMat::zeros(dim, dim);
        let jumps: Vec<(SparseOp, SparseOp)> = spec
            .jumps
            .iter()
            .map(|l| {
                let ld = l.adjoint();
                g_total += &ld * l;
                (SparseOp::from_dense(l), SparseOp::from_dense(&ld))
            })
            .collect();
        let zeros = CMat::zeros(dim, dim);
        Self {
            dim,
            h: SparseOp::from_dense(&spec.hamiltonian),
            jumps,
            g_total: SparseOp::from_dense(&g_total),
            epsilon: spec.epsilon,
            k: [zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone()],
            tmp: zeros.clone(),
            stage: zeros,
        }
    }

    /// out = -i[H, ρ] + ε Σ_j (L_j ρ L_j† - ½{L_j†L_j, ρ}).
    fn rhs(&mut self, rho: &CMat, which: usize) {
        let eps = c(self.epsilon);
        self.k[which].fill(Complex64::new(0.0, 0.0));
        let out = &mut self.k[which];
        self.h.apply_left(-I, rho, out);
        self.h.apply_right(I, rho, out);
        self.g_total.apply_left(-0.5 * eps, rho, out);
        self.g_total.apply_right(-0.5 * eps, rho, out);
        for (l, ld) in &self.jumps {
            self.tmp.fill(Complex64::new(0.0, 0.0));
            l.apply_left(c(1.0), rho, &mut self.tmp);
            ld.apply_right(eps, &self.tmp, out);
        }
    }

    pub fn rk4_step(&mut self, rho: &mut CMat, dt: f64) {
        self.rhs(rho, 0);
        for (stage_idx, step) in [(1, dt / 2.0), (2, dt / 2.0), (3, dt)] {
            let mut stage = std::mem::take(&mut self.stage);
            stage.copy_from(rho);
            axpy(&mut stage, c(step), &self.k[stage_idx - 1]);
            self.rhs(&stage, stage_idx);
            self.stage = stage;
        }
        axpy(rho, c(dt / 6.0), &self.k[0]);
        axpy(rho, c(dt / 3.0), &self.k[1]);
        axpy(rho, c(dt / 3.0), &self.k[2]);
        axpy(rho, c(dt / 6.0), &self.k[3]);
        hermitize(rho);
    }

    /// Integrates to `t_end`, shortening the last step to land exactly.
    /// The observer fires at t = 0 and after every step with the current
    /// time. Aborts if the trace drifts by more than 1e-8.
    pub fn evolve(
        &mut self,
        rho: &mut CMat,
        t_end: f64,
        dt: f64,
        mut observer: impl FnMut(f64, &CMat),
    ) -> Result<()> {
        if dt <= 0.0 {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        let mut t = 0.0;
        observer(t, rho);
        while t_end - t > dt * 1e-9 {
            let step = dt.min(t_end - t);
            self.rk4_step(rho, step);
            t += step;
            let drift = (trace(rho).re - 1.0).abs() + trace(rho).im.abs();
            // A NaN trace (diverged integration) must abort as well.
            if drift > 1e-8 || drift.is_nan() {
                return Err(Error::TraceDrift { drift, t });
            }
            observer(t, rho);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// y += α x, elementwise over whole matrices.
fn axpy(y: &mut CMat, alpha: Complex64, x: &CMat) {
    for (yv, xv) in y.as_mut_slice().iter_mut().zip(x.as_slice()) {
        *yv += alpha * xv;
    }
}

/// Default integrator step; validated by step-halving agreement in tests.
pub fn default_dt() -> f64 {
    0.01
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::observables::thermal_state;
    use crate::oracle::ops::{expectation, min_eigenvalue};

    #[test]
    fn small_field_only_hamiltonian_is_diagonal() {
        let h = build_tfim_dense(0.0, 1.0, 2).unwrap();
        let expect = [2.0, 0.0, 0.0, -2.0];
        for (k, e) in expect.iter().enumerate() {
            assert!((h[(k, k)].re - e).abs() < 1e-15);
        }
        assert!(h.norm() - (8.0f64).sqrt() < 1e-14);
        assert!(build_tfim_dense(1.0, 1.0, 1).is_err());
        assert!(build_tfim_dense(1.0, 1.0, 13).is_err());
    }

    #[test]
    fn unitary_evolution_preserves_spectrum() {
        let spec = LindbladSpec::tfim(1.0, 0.6, 4, 0.0).unwrap();
        let mut rho = thermal_state(&spec.hamiltonian, 0.7);
        let eig0 = rho.clone().symmetric_eigen().eigenvalues;
        let mut prop = LindbladPropagator::new(&spec);
        prop.evolve(&mut rho, 2.0, 0.01, |_, _| {}).unwrap();
        let mut eig1 = rho.clone().symmetric_eigen().eigenvalues;
        let mut eig0 = eig0.as_slice().to_vec();
        let mut eig1v = eig1.as_mut_slice().to_vec();
        eig0.sort_by(f64::total_cmp);
        eig1v.sort_by(f64::total_cmp);
        for (a, b) in eig0.iter().zip(&eig1v) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let spec = LindbladSpec::tfim(1.0, 0.6, 3, 0.2).unwrap();
        let dim = 8;
        let mut rho = CMat::identity(dim, dim) * c(1.0 / dim as f64);
        let before = rho.clone();
        let mut prop = LindbladPropagator::new(&spec);
        prop.evolve(&mut rho, 0.0, 0.01, |_, _| {}).unwrap();
        assert_eq!(rho, before);
    }

    #[test]
    fn step_halving_agreement_and_positivity() {
        let spec = LindbladSpec::tfim(1.0, 0.6, 4, 0.2).unwrap();
        let dim = 16;
        let rho0 = CMat::identity(dim, dim) * c(1.0 / dim as f64);

        let mut coarse = rho0.clone();
        let mut prop = LindbladPropagator::new(&spec);
        prop.evolve(&mut coarse, 2.0, 0.01, |_, _| {}).unwrap();

        let mut fine = rho0;
        prop.evolve(&mut fine, 2.0, 0.005, |_, _| {}).unwrap();

        assert!((&coarse - &fine).norm() < 1e-8);
        assert!(min_eigenvalue(&coarse) > -1e-8);
        assert!((trace(&coarse).re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn runaway_steps_abort_on_trace_drift() {
        let spec = LindbladSpec::tfim(1.0, 0.6, 4, 0.3).unwrap();
        let dim = 16;
        let mut rho = CMat::identity(dim, dim) * c(1.0 / dim as f64);
        let mut prop = LindbladPropagator::new(&spec);
        // Far beyond the RK4 stability region for this generator.
        let err = prop.evolve(&mut rho, 50.0, 2.5, |_, _| {}).unwrap_err();
        assert!(matches!(err, crate::error::Error::TraceDrift { .. }));
    }

    #[test]
    fn propagator_matches_dense_rhs() {
        let spec = LindbladSpec::tfim(0.9, 0.5, 3, 0.3).unwrap();
        let rho = thermal_state(&spec.hamiltonian, 0.4);
        // Dense reference: -i[H, ρ] + dissipator.
        let comm = &spec.hamiltonian * &rho - &rho * &spec.hamiltonian;
        let expect = comm * (-I) + spec.dissipator(&rho);
        let mut prop = LindbladPropagator::new(&spec);
        prop.rhs(&rho, 0);
        assert!((&prop.k[0] - &expect).norm() < 1e-12);
        // Trace-free generator.
        assert!(trace(&expect).norm() < 1e-12);
        // σˣσˣ expectation drifts under dissipation from a thermal state.
        let xx = op_on_sites(3, &[(0, &pauli_x()), (1, &pauli_x())]);
        let before = expectation(&xx, &rho);
        let mut evolved = rho.clone();
        prop.evolve(&mut evolved, 1.0, 0.01, |_, _| {}).unwrap();
        assert!((expectation(&xx, &evolved) - before).abs() > 1e-4);
    }
}
