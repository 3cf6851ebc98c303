//! Exact Trotterized circuit with ancilla reset. System and ancilla qubits
//! interleave as s_0, a_0, s_1, a_1, …; one cycle applies, for each step
//! τ = 1..T,
//!
//!   U_S = e^{-iπJ/2 Σ σˣσˣ} e^{-iπh/2 Σ σᶻ}   (system, PBC),
//!   U_A = e^{-iπh_A/2 Σ σ̃ᶻ}                   (ancillas),
//!   U_{SA,τ} = Π_j e^{-iλ_τ Q_j ⊗ σ̃ˣ_j},       Q_j = S⁺_jS⁻_{j+1} + S⁻_jS⁺_{j+1},
//!
//! and then resets every ancilla to spin-down by partial trace.

use num_complex::Complex64;

use super::ops::{c, CMat, I};
use crate::error::{Error, Result};
use crate::reset::ResetParams;

/// Applies a k-qubit gate to every column of `mat` (i.e. mat ← G·mat with G
/// embedded on `qubits`). The first listed qubit is the gate's most
/// significant tensor factor; qubit 0 of the register is the leftmost.
pub fn apply_gate_left(mat: &mut CMat, gate: &CMat, qubits: &[usize], n_qubits: usize) {
    let dim = 1usize << n_qubits;
    debug_assert_eq!(mat.nrows(), dim);
    let k = qubits.len();
    let gdim = 1usize << k;
    debug_assert_eq!(gate.nrows(), gdim);
    let pos: Vec<usize> = qubits.iter().map(|&q| n_qubits - 1 - q).collect();
    let joint_mask: usize = pos.iter().map(|&p| 1usize << p).sum();
    let mut gathered = vec![Complex64::new(0.0, 0.0); gdim];
    let data = mat.as_mut_slice();
    for col in 0..dim {
        let column = &mut data[col * dim..(col + 1) * dim];
        for base in 0..dim {
            if base & joint_mask != 0 {
                continue;
            }
            for (g, slot) in gathered.iter_mut().enumerate() {
                let mut idx = base;
                for (i, &p) in pos.iter().enumerate() {
                    if (g >> (k - 1 - i)) & 1 == 1 {
                        idx |= 1 << p;
                    }
                }
                *slot = column[idx];
            }
            for gp in 0..gdim {
                let mut acc = Complex64::new(0.0, 0.0);
                for (g, amp) in gathered.iter().enumerate() {
                    acc += gate[(gp, g)] * amp;
                }
                let mut idx = base;
                for (i, &p) in pos.iter().enumerate() {
                    if (gp >> (k - 1 - i)) & 1 == 1 {
                        idx |= 1 << p;
                    }
                }
                column[idx] = acc;
            }
        }
    }
}

/// σ̃ˣ on one ancilla of the interleaved register.
fn op_on_interleaved_ancilla(l_sys: usize, m: usize) -> CMat {
    super::ops::op_on_sites(2 * l_sys, &[(2 * m + 1, &super::ops::pauli_x())])
}

/// Full basis index for the interleaved register given separate system and
/// ancilla bit patterns (bit l_sys-1-m of each pattern is site m).
fn interleaved_index(s: usize, a: usize, l_sys: usize) -> usize {
    let n_qubits = 2 * l_sys;
    let mut idx = 0usize;
    for m in 0..l_sys {
        let s_bit = (s >> (l_sys - 1 - m)) & 1;
        let a_bit = (a >> (l_sys - 1 - m)) & 1;
        idx |= s_bit << (n_qubits - 1 - 2 * m);
        idx |= a_bit << (n_qubits - 1 - (2 * m + 1));
    }
    idx
}

/// Partial trace over the ancilla register.
pub fn system_marginal(rho: &CMat, l_sys: usize) -> CMat {
    let sdim = 1usize << l_sys;
    let mut out = CMat::zeros(sdim, sdim);
    for s in 0..sdim {
        for sp in 0..sdim {
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..sdim {
                acc += rho[(
                    interleaved_index(s, a, l_sys),
                    interleaved_index(sp, a, l_sys),
                )];
            }
            out[(s, sp)] = acc;
        }
    }
    out
}

/// Tensors a system state with all ancillas in spin-down (bit 1).
pub fn embed_with_ancillas_down(rho_sys: &CMat, l_sys: usize) -> CMat {
    let sdim = 1usize << l_sys;
    let dim = sdim * sdim;
    let down = sdim - 1;
    let mut out = CMat::zeros(dim, dim);
    for s in 0..sdim {
        for sp in 0..sdim {
            out[(
                interleaved_index(s, down, l_sys),
                interleaved_index(sp, down, l_sys),
            )] = rho_sys[(s, sp)];
        }
    }
    out
}

/// Reset channel: trace out the ancillas and re-tensor them in spin-down.
pub fn reset_ancillas(rho: &CMat, l_sys: usize) -> CMat {
    embed_with_ancillas_down(&system_marginal(rho, l_sys), l_sys)
}

/// Embeds a system-register operator into the interleaved system+ancilla
/// space, acting as the identity on the ancillas.
pub fn embed_system_op(op_sys: &CMat, l_sys: usize) -> CMat {
    let sdim = 1usize << l_sys;
    let dim = sdim * sdim;
    let mut out = CMat::zeros(dim, dim);
    for s in 0..sdim {
        for sp in 0..sdim {
            let v = op_sys[(s, sp)];
            if v.norm_sqr() == 0.0 {
                continue;
            }
            for a in 0..sdim {
                out[(
                    interleaved_index(s, a, l_sys),
                    interleaved_index(sp, a, l_sys),
                )] = v;
            }
        }
    }
    out
}

/// Precomputed one-cycle unitary (everything before the reset).
pub struct ResetCircuit {
    pub l_sys: usize,
    dim: usize,
    u_cycle: CMat,
    u_cycle_dag: CMat,
}

impl ResetCircuit {
    /// Physical circuit over spin gates (the boundary bond is the plain
    /// spin operator, which fermionizes differently in the two parity
    /// sectors).
    pub fn new(j: f64, h: f64, params: &ResetParams, l_sys: usize) -> Result<Self> {
        Self::build(j, h, params, l_sys, false)
    }

    /// Even-sector lift: the boundary σˣσˣ bond and the boundary coupling
    /// Q_{L-1} are replaced by their anti-periodic fermion forms, so the
    /// circuit matches the K⁺ quasiparticle description on the full space.
    pub fn new_even_sector(j: f64, h: f64, params: &ResetParams, l_sys: usize) -> Result<Self> {
        Self::build(j, h, params, l_sys, true)
    }

    fn build(j: f64, h: f64, params: &ResetParams, l_sys: usize, even_sector: bool) -> Result<Self> {
        if !(2..=5).contains(&l_sys) {
            return Err(Error::InvalidParameter(format!(
                "reset oracle supports 2 <= L_sys <= 5 system qubits, got {l_sys}"
            )));
        }
        let n_qubits = 2 * l_sys;
        let dim = 1usize << n_qubits;
        let sys = |m: usize| 2 * m;
        let anc = |m: usize| 2 * m + 1;

        // Two-site building blocks. (σˣσˣ)² = 1 gives the closed-form
        // exponential; Q² = P projects onto the flip subspace {01, 10}.
        let xx_gate = {
            let mut g = CMat::identity(4, 4) * c((std::f64::consts::PI * j / 2.0).cos());
            let s = (std::f64::consts::PI * j / 2.0).sin();
            // σˣ⊗σˣ is the anti-diagonal permutation.
            for (r, col) in [(0, 3), (1, 2), (2, 1), (3, 0)] {
                g[(r, col)] += -I * c(s);
            }
            g
        };
        let z_gate = |field: f64| {
            let phase = std::f64::consts::PI * field / 2.0;
            CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![
                Complex64::from_polar(1.0, -phase),
                Complex64::from_polar(1.0, phase),
            ]))
        };
        let coupling_gate = |lambda: f64| {
            // e^{-iλ Q⊗σˣ} = 1 + (cos λ - 1) P⊗1 - i sin λ Q⊗σˣ.
            let mut q = CMat::zeros(4, 4);
            q[(1, 2)] = c(1.0);
            q[(2, 1)] = c(1.0);
            let mut p = CMat::zeros(4, 4);
            p[(1, 1)] = c(1.0);
            p[(2, 2)] = c(1.0);
            let x = super::ops::pauli_x();
            CMat::identity(8, 8) + p.kronecker(&super::ops::identity(2)) * c(lambda.cos() - 1.0)
                - q.kronecker(&x) * (I * c(lambda.sin()))
        };

        // Anti-periodic boundary replacements, dense on the full register.
        // The boundary bond becomes -B_{L-1}A_0 (Majoranas A = c†+c,
        // B = c†-c) and the boundary coupling -(c†_{L-1}c_0 + c†_0c_{L-1});
        // both square to simple projectors, so the exponentials stay closed
        // form.
        let abc = even_sector.then(|| {
            let cs = super::observables::annihilation_ops(l_sys);
            let a0 = cs[0].adjoint() + &cs[0];
            let b_last = cs[l_sys - 1].adjoint() - &cs[l_sys - 1];
            let w = embed_system_op(&(-(&b_last * &a0)), l_sys);
            let theta = std::f64::consts::PI * j / 2.0;
            let big = CMat::identity(dim, dim) * c(theta.cos()) - &w * (I * c(theta.sin()));
            let q = embed_system_op(
                &(-(cs[l_sys - 1].adjoint() * &cs[0] + cs[0].adjoint() * &cs[l_sys - 1])),
                l_sys,
            );
            let p = &q * &q;
            let x_anc = op_on_interleaved_ancilla(l_sys, l_sys - 1);
            (big, q, p, x_anc)
        });
        let boundary_coupling = |lambda: f64| {
            abc.as_ref().map(|(_, q, p, x_anc)| {
                CMat::identity(dim, dim) + p * c(lambda.cos() - 1.0)
                    - q * x_anc * (I * c(lambda.sin()))
            })
        };

        let mut u = CMat::identity(dim, dim);
        for &lambda in &params.lambdas {
            // U_S: transverse-field rotations first, then the commuting
            // σˣσˣ bond gates (PBC over system sites).
            for m in 0..l_sys {
                apply_gate_left(&mut u, &z_gate(h), &[sys(m)], n_qubits);
            }
            for m in 0..l_sys {
                if m + 1 == l_sys {
                    if let Some((big, _, _, _)) = &abc {
                        u = big * &u;
                        continue;
                    }
                }
                apply_gate_left(
                    &mut u,
                    &xx_gate,
                    &[sys(m), sys((m + 1) % l_sys)],
                    n_qubits,
                );
            }
            // U_A on the ancillas.
            for m in 0..l_sys {
                apply_gate_left(&mut u, &z_gate(params.h_a), &[anc(m)], n_qubits);
            }
            // U_{SA,τ}, ordered product with ascending j applied first.
            let g = coupling_gate(lambda);
            let g_boundary = boundary_coupling(lambda);
            for m in 0..l_sys {
                if m + 1 == l_sys {
                    if let Some(gb) = &g_boundary {
                        u = gb * &u;
                        continue;
                    }
                }
                apply_gate_left(
                    &mut u,
                    &g,
                    &[sys(m), sys((m + 1) % l_sys), anc(m)],
                    n_qubits,
                );
            }
        }
        let u_cycle_dag = u.adjoint();
        Ok(Self {
            l_sys,
            dim,
            u_cycle: u,
            u_cycle_dag,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// One full cycle: the T coupled Trotter steps followed by the reset.
    pub fn cycle(&self, rho: &CMat) -> Result<CMat> {
        if rho.nrows() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "state has dimension {}, circuit needs {}",
                rho.nrows(),
                self.dim
            )));
        }
        let mut evolved = &self.u_cycle * rho * &self.u_cycle_dag;
        super::ops::hermitize(&mut evolved);
        Ok(reset_ancillas(&evolved, self.l_sys))
    }

    /// Runs `n_cycles` cycles from a system-only state; the observer sees the
    /// system marginal after every cycle (cycle index starts at 1).
    pub fn run_cycles(
        &self,
        rho_sys: &CMat,
        n_cycles: usize,
        mut observer: impl FnMut(usize, &CMat),
    ) -> Result<CMat> {
        let mut rho = embed_with_ancillas_down(rho_sys, self.l_sys);
        for cycle in 1..=n_cycles {
            rho = self.cycle(&rho)?;
            observer(cycle, &system_marginal(&rho, self.l_sys));
        }
        Ok(system_marginal(&rho, self.l_sys))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ops::{expectation, min_eigenvalue, op_on_sites, pauli_x, trace};

    #[test]
    fn gate_application_matches_kronecker_embedding() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(61);
        let n = 4;
        let dim = 16;
        let gate = CMat::from_fn(4, 4, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut mat = CMat::from_fn(dim, dim, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let reference = {
            // Embed on non-adjacent, out-of-order qubits (3, 1): permute the
            // gate into (1, 3) order via swap on its own indices.
            let mut g13 = CMat::zeros(4, 4);
            for a in 0..2 {
                for b in 0..2 {
                    for ap in 0..2 {
                        for bp in 0..2 {
                            // gate index order (q3, q1) -> embedded (q1, q3)
                            g13[(2 * a + b, 2 * ap + bp)] = gate[(2 * b + a, 2 * bp + ap)];
                        }
                    }
                }
            }
            let mut big = CMat::zeros(dim, dim);
            for i1 in 0..2 {
                for i3 in 0..2 {
                    for j1 in 0..2 {
                        for j3 in 0..2 {
                            let val = g13[(2 * i1 + i3, 2 * j1 + j3)];
                            for i0 in 0..2 {
                                for i2 in 0..2 {
                                    let r = 8 * i0 + 4 * i1 + 2 * i2 + i3;
                                    let cidx = 8 * i0 + 4 * j1 + 2 * i2 + j3;
                                    big[(r, cidx)] = val;
                                }
                            }
                        }
                    }
                }
            }
            &big * &mat
        };
        apply_gate_left(&mut mat, &gate, &[3, 1], n);
        assert!((mat - reference).norm() < 1e-12);
    }

    #[test]
    fn decoupled_circuit_preserves_system_spectrum() {
        let params = ResetParams::uniform(0.8, 3, 0.0).unwrap();
        let circuit = ResetCircuit::new(0.8, 0.45, &params, 3).unwrap();
        let sdim = 8;
        let mut rho_sys = CMat::zeros(sdim, sdim);
        // An arbitrary diagonal-dominant density matrix.
        for k in 0..sdim {
            rho_sys[(k, k)] = c((k + 1) as f64);
        }
        rho_sys[(0, 3)] = c(0.5);
        rho_sys[(3, 0)] = c(0.5);
        let z = trace(&rho_sys).re;
        rho_sys /= c(z);
        let mut before: Vec<f64> = rho_sys
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .copied()
            .collect();
        let after_m = circuit.run_cycles(&rho_sys, 2, |_, _| {}).unwrap();
        let mut after: Vec<f64> = after_m.symmetric_eigen().eigenvalues.iter().copied().collect();
        before.sort_by(f64::total_cmp);
        after.sort_by(f64::total_cmp);
        for (a, b) in before.iter().zip(&after) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn decoupled_infinite_temperature_is_invariant() {
        let params = ResetParams::uniform(-0.4, 2, 0.0).unwrap();
        let circuit = ResetCircuit::new(0.8, 0.45, &params, 2).unwrap();
        let rho_sys = CMat::identity(4, 4) * c(0.25);
        let out = circuit.run_cycles(&rho_sys, 3, |_, _| {}).unwrap();
        assert!((out - CMat::identity(4, 4) * c(0.25)).norm() < 1e-12);
    }

    #[test]
    fn cycle_is_trace_preserving_and_positive() {
        let params = ResetParams::uniform(0.8, 4, 0.2).unwrap();
        let circuit = ResetCircuit::new(0.8, 0.45, &params, 3).unwrap();
        let sdim = 8;
        let rho_sys = CMat::identity(sdim, sdim) * c(1.0 / sdim as f64);
        let mut traces = Vec::new();
        let final_m = circuit
            .run_cycles(&rho_sys, 5, |_, m| {
                traces.push(trace(m).re);
                assert!(min_eigenvalue(m) > -1e-10);
            })
            .unwrap();
        for t in traces {
            assert!((t - 1.0).abs() < 1e-10);
        }
        // Coupled evolution moves the state away from infinite temperature.
        let xx = op_on_sites(3, &[(0, &pauli_x()), (1, &pauli_x())]);
        assert!(expectation(&xx, &final_m).abs() > 1e-4);
    }
}
