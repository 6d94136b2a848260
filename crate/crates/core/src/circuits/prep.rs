//! Resource-state preparation on path registers: the cascade of branching
//! gates F_i and mirror copies that produces the symmetric-path
//! superposition with amplitude √(f_μ/d_μ) per path pair. The trailing
//! mixed-Schur block of the full preparation is out of scope; the
//! path-register state is what gets verified.

use num_complex::Complex64;

use crate::algebra::c;
use crate::bratteli::BratteliDiagram;
use crate::error::{Error, Result};
use crate::partitions::sym_dim_f64;
use crate::protocols::FDistribution;

use super::context::{column_prep_unitary, Register, RegisterKind};
use super::Gate;

#[derive(Clone, Debug)]
pub struct PrepCircuit {
    pub n: usize,
    pub d: usize,
    pub diagram: BratteliDiagram,
    pub registers: Vec<Register>,
    pub gates: Vec<Gate>,
    /// `f` extended to every level by the downward recursion
    /// `f_ν/d_ν = Σ_a f_{ν∪a}/d_{ν∪a}`; indexed `[level][vertex]`.
    pub f_levels: Vec<Vec<f64>>,
    strides: Vec<usize>,
    total_dim: usize,
    /// Register id per up level 2..=n.
    reg_up: Vec<Option<usize>>,
    /// Register id per mirrored level 2..=n-1.
    reg_down: Vec<Option<usize>>,
}

pub fn synth_resource_prep(n: usize, d: usize, f: &FDistribution) -> Result<PrepCircuit> {
    if n < 2 {
        return Err(Error::InvalidArgument("resource prep needs n >= 2".into()));
    }
    if f.n != n || f.d != d {
        return Err(Error::InvalidArgument("f-distribution shape mismatch".into()));
    }
    let diagram = BratteliDiagram::build(n, d, false)?;

    // Extend f downward so each F_i branch is normalized.
    let mut f_levels: Vec<Vec<f64>> = (0..=n)
        .map(|k| vec![0.0; diagram.level(k).len()])
        .collect();
    for (v, mu) in diagram.level(n).iter().enumerate() {
        f_levels[n][v] = f.get(mu);
    }
    for k in (0..n).rev() {
        for (v, nu) in diagram.level(k).iter().enumerate() {
            let d_nu = sym_dim_f64(nu);
            let mut acc = 0.0;
            for &child in diagram.children(k, v) {
                let grown = diagram.vertex(k + 1, child);
                acc += f_levels[k + 1][child] / sym_dim_f64(grown);
            }
            f_levels[k][v] = d_nu * acc;
        }
    }

    let mut registers = Vec::new();
    let mut reg_up = vec![None; n + 1];
    let mut reg_down = vec![None; n + 1];
    for k in 2..=n {
        registers.push(Register {
            name: format!("T{k}"),
            kind: RegisterKind::PathVertex { level: k },
            dim: diagram.level(k).len(),
        });
        reg_up[k] = Some(registers.len() - 1);
    }
    for k in (2..=n.saturating_sub(1)).rev() {
        registers.push(Register {
            name: format!("T{}", 2 * n - k),
            kind: RegisterKind::PathVertex { level: 2 * n - k },
            dim: diagram.level(k).len(),
        });
        reg_down[k] = Some(registers.len() - 1);
    }
    let mut strides = vec![0usize; registers.len()];
    let mut acc = 1usize;
    for (i, r) in registers.iter().enumerate().rev() {
        strides[i] = acc;
        acc *= r.dim;
    }

    let mut gates = Vec::new();
    for k in 2..=n {
        gates.push(Gate::FGate { level: k });
        if k < n {
            gates.push(Gate::CopyGate { level: k });
        }
    }

    Ok(PrepCircuit {
        n,
        d,
        diagram,
        registers,
        gates,
        f_levels,
        strides,
        total_dim: acc,
        reg_up,
        reg_down,
    })
}

impl PrepCircuit {
    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0usize; self.registers.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = idx / s;
            idx %= s;
        }
        out
    }

    fn index_of(&self, values: &[usize]) -> usize {
        values.iter().zip(&self.strides).map(|(v, s)| v * s).sum()
    }

    fn apply_f(&self, amps: &mut [Complex64], level: usize) {
        let reg = self.reg_up[level].unwrap();
        let stride = self.strides[reg];
        let dim = self.registers[reg].dim;
        let block = stride * dim;
        for (parent_idx, nu) in self.diagram.level(level - 1).iter().enumerate() {
            let f_nu = self.f_levels[level - 1][parent_idx];
            if f_nu <= 1e-300 {
                continue;
            }
            let d_nu = sym_dim_f64(nu);
            let children = self.diagram.children(level - 1, parent_idx);
            // Support: the all-zeros marker state first, then the children.
            let mut support = vec![0usize];
            let mut target = vec![0.0f64];
            for &child in children {
                let grown = self.diagram.vertex(level, child);
                let amp2 = (self.f_levels[level][child] / f_nu) * (d_nu / sym_dim_f64(grown));
                if child == 0 {
                    target[0] = amp2.max(0.0).sqrt();
                } else {
                    support.push(child);
                    target.push(amp2.max(0.0).sqrt());
                }
            }
            let unitary = column_prep_unitary(&target);
            let mut gathered = vec![Complex64::default(); support.len()];
            for base in (0..self.total_dim).step_by(block) {
                for off in 0..stride {
                    let idx0 = base + off;
                    let values = self.decode(idx0);
                    // Control: the parent register (level-1) holds ν; level 1
                    // is implicit.
                    if level >= 3 {
                        if values[self.reg_up[level - 1].unwrap()] != parent_idx {
                            continue;
                        }
                    } else if parent_idx != 0 {
                        continue;
                    }
                    for (j, &v) in support.iter().enumerate() {
                        gathered[j] = amps[idx0 + v * stride];
                    }
                    for (i, &vi) in support.iter().enumerate() {
                        let mut acc = Complex64::default();
                        for (j, &g) in gathered.iter().enumerate() {
                            acc += g * unitary[[i, j]];
                        }
                        amps[idx0 + vi * stride] = acc;
                    }
                }
            }
        }
    }

    fn apply_copy(&self, amps: &mut [Complex64], level: usize) {
        let src = self.reg_up[level].unwrap();
        let dst = self.reg_down[level].unwrap();
        let s_src = self.strides[src];
        let s_dst = self.strides[dst];
        // (v, 0) ↔ (v, v) is an involution; everything else is fixed.
        let mut out = vec![Complex64::default(); self.total_dim];
        for idx in 0..self.total_dim {
            let a = amps[idx];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let values = self.decode(idx);
            let v = values[src];
            let w = values[dst];
            let new_idx = if w == 0 && v != 0 {
                (idx as i64 + v as i64 * s_dst as i64) as usize
            } else if w == v && v != 0 {
                (idx as i64 - v as i64 * s_dst as i64) as usize
            } else {
                idx
            };
            out[new_idx] = a;
        }
        amps.copy_from_slice(&out);
        let _ = s_src;
    }

    /// Run the circuit from the all-zeros register state.
    pub fn simulate(&self) -> Vec<Complex64> {
        let mut amps = vec![Complex64::default(); self.total_dim];
        amps[0] = c(1.0);
        for gate in &self.gates {
            match gate {
                Gate::FGate { level } => self.apply_f(&mut amps, *level),
                Gate::CopyGate { level } => self.apply_copy(&mut amps, *level),
                _ => unreachable!("prep circuits hold only F and Copy gates"),
            }
        }
        amps
    }

    /// Compare the simulated register state with the closed form: amplitude
    /// `√(f_μ/d_μ)` on every mirrored path pair, zero elsewhere. Returns the
    /// largest absolute deviation.
    pub fn verify_closed_form(&self) -> Result<f64> {
        let amps = self.simulate();
        let n = self.n;
        let mut expected = vec![Complex64::default(); self.total_dim];
        for (mu_idx, mu) in self.diagram.level(n).iter().enumerate() {
            let f_mu = self.f_levels[n][mu_idx];
            let amp = c((f_mu / sym_dim_f64(mu)).max(0.0).sqrt());
            for prefix in self.diagram.paths_to(n, mu_idx)? {
                let mut values = vec![0usize; self.registers.len()];
                for k in 2..=n {
                    values[self.reg_up[k].unwrap()] = prefix[k];
                }
                for k in 2..=n.saturating_sub(1) {
                    values[self.reg_down[k].unwrap()] = prefix[k];
                }
                expected[self.index_of(&values)] = amp;
            }
        }
        let max_diff = amps
            .iter()
            .zip(expected.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        Ok(max_diff)
    }

    pub fn state_norm(&self) -> f64 {
        self.simulate().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Serialize registers and gates (parameters are reproducible from `f`).
    pub fn export_json(&self) -> String {
        #[derive(serde::Serialize)]
        struct Dump<'a> {
            n: usize,
            d: usize,
            registers: &'a [Register],
            gates: &'a [Gate],
        }
        serde_json::to_string_pretty(&Dump {
            n: self.n,
            d: self.d,
            registers: &self.registers,
            gates: &self.gates,
        })
        .expect("prep circuit serializes")
    }
}

/// Expected squared amplitude table per terminal partition, used by reports.
pub fn terminal_amplitudes(prep: &PrepCircuit) -> Vec<(String, f64)> {
    let n = prep.n;
    prep.diagram
        .level(n)
        .iter()
        .enumerate()
        .map(|(v, mu)| {
            (
                mu.to_string(),
                prep.f_levels[n][v] / sym_dim_f64(mu),
            )
        })
        .collect()
}
