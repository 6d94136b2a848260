//! Synthesis of the measurement circuits in both encodings, the correction
//! pass, and the circuit-vs-POVM comparison harness.

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;

use crate::algebra::{c, dagger, max_abs_diff, psd_sqrt, CVec};
use crate::error::{Error, Result};
use crate::measurements::{generic_povm, pgm_bruteforce, GDiag};

use super::context::{Encoding, MeasurementContext};
use super::{Gate, WKind};

/// A synthesized measurement circuit: context (registers, diagram, caches)
/// plus the ordered gate list. The phase register is measured at the end.
#[derive(Clone, Debug)]
pub struct MeasurementCircuit {
    pub ctx: MeasurementContext,
    pub gates: Vec<Gate>,
    pub with_corr: bool,
}

impl MeasurementCircuit {
    /// JSON serialization: registers, the ordered gate list, and the exact
    /// rational rotation parameters per wedge branch (branching ratios and
    /// deformation values as `num/den` strings). Byte-deterministic.
    pub fn export_json(&self) -> String {
        #[derive(serde::Serialize)]
        struct BranchParams {
            lam: String,
            branch_cells: Vec<(usize, usize)>,
            /// Exact branching ratios d_{λ∪a} / (n d_λ) as `num/den`.
            eta: Vec<String>,
            /// Deformation diagonal as supplied (already floating point at
            /// the interface; rotations round exactly once).
            g: Option<Vec<f64>>,
        }
        #[derive(serde::Serialize)]
        struct Dump<'a> {
            n: usize,
            d: usize,
            encoding: super::context::Encoding,
            registers: &'a [super::context::Register],
            gates: &'a [Gate],
            parameters: Vec<BranchParams>,
        }
        let ctx = &self.ctx;
        let mut parameters = Vec::new();
        for info in ctx.wedge.iter().flatten() {
            let eta: Vec<String> = info
                .branch_cells
                .iter()
                .map(|&a| {
                    crate::partitions::branch_ratio(&info.lam, a)
                        .expect("branch cell")
                        .to_string()
                })
                .collect();
            let g = if ctx.deformed {
                Some(info.g_values.clone())
            } else {
                None
            };
            parameters.push(BranchParams {
                lam: info.lam.to_string(),
                branch_cells: info.branch_cells.iter().map(|a| (a.row, a.col)).collect(),
                eta,
                g,
            });
        }
        serde_json::to_string_pretty(&Dump {
            n: ctx.n,
            d: ctx.d,
            encoding: ctx.encoding,
            registers: &ctx.registers,
            gates: &self.gates,
            parameters,
        })
        .expect("circuit serializes")
    }
}

fn pi_dagger_std(n: usize) -> Vec<Gate> {
    (1..n).map(|i| Gate::Transposition { i }).collect()
}

fn pi_std(n: usize) -> Vec<Gate> {
    (1..n).rev().map(|i| Gate::Transposition { i }).collect()
}

/// π† in the Yamanouchi encoding with sliding recording: the work register
/// ends at level n-1, ready for the sandwich.
fn pi_dagger_yam_recorded(n: usize) -> Vec<Gate> {
    let mut gs = vec![Gate::YamCore { i: 1 }];
    for i in 2..n {
        gs.push(Gate::YamCore { i });
        gs.push(Gate::Rec { step: i, dagger: false });
    }
    gs
}

fn unrecord(from_step: usize) -> Vec<Gate> {
    (2..=from_step)
        .rev()
        .map(|step| Gate::Rec { step, dagger: true })
        .collect()
}

/// Standalone π† in the Yamanouchi encoding (work register returned to 0).
fn pi_dagger_yam(n: usize) -> Vec<Gate> {
    let mut gs = vec![Gate::YamCore { i: 1 }];
    for i in 2..n {
        if i >= 3 {
            gs.push(Gate::Rec { step: i - 1, dagger: false });
        }
        gs.push(Gate::YamCore { i });
    }
    gs.extend(unrecord(n.saturating_sub(2)));
    gs
}

/// Standalone π in the Yamanouchi encoding.
fn pi_yam(n: usize) -> Vec<Gate> {
    let mut gs = Vec::new();
    for step in 2..=n.saturating_sub(2) {
        gs.push(Gate::Rec { step, dagger: false });
    }
    for i in (2..n).rev() {
        gs.push(Gate::YamCore { i });
        if i >= 3 {
            gs.push(Gate::Rec { step: i - 1, dagger: true });
        }
    }
    gs.push(Gate::YamCore { i: 1 });
    gs
}

/// The measurement gate sequence: Schur block, phase-estimation rounds of
/// (π†, W̃† ω W̃) conjugations, Fourier readout.
pub fn measurement_gates(ctx: &MeasurementContext) -> Vec<Gate> {
    let n = ctx.n;
    let mut gates = vec![
        Gate::SchurBlock { inverse: false },
        Gate::Qft { dagger: false },
    ];
    if ctx.deformed {
        gates.push(Gate::DilationRotation { dagger: true });
    }
    match ctx.encoding {
        Encoding::Standard => {
            for round in 1..=n {
                gates.extend(pi_dagger_std(n));
                gates.push(Gate::WPrep { dagger: true, kind: WKind::Dilated });
                gates.push(Gate::PhaseMark { round });
                gates.push(Gate::WPrep { dagger: false, kind: WKind::Dilated });
            }
        }
        Encoding::Yamanouchi => {
            for round in 1..=n {
                // The sliding recording inside π† already leaves the work
                // register at level n-1, exactly what the sandwich reads.
                gates.extend(pi_dagger_yam_recorded(n));
                gates.push(Gate::YamWPrep { dagger: true, kind: WKind::Dilated });
                gates.push(Gate::YamPhaseMark { round });
                gates.push(Gate::YamWPrep { dagger: false, kind: WKind::Dilated });
                gates.extend(unrecord(n.saturating_sub(1)));
            }
        }
    }
    if ctx.deformed {
        gates.push(Gate::DilationRotation { dagger: false });
    }
    gates.push(Gate::Qft { dagger: true });
    gates
}

/// Correction gates for measurement outcome `k ≥ 1`: undo the branch
/// rotation on the dilation qubit (deformed circuits), conjugate by π^{-k},
/// replace the dilated column by the undilated (or G-weighted) one, and
/// conjugate back. Brings the post-measurement state to the square-root
/// Kraus form of the measured POVM element.
pub fn corr_gates(ctx: &MeasurementContext, k: usize) -> Vec<Gate> {
    let n = ctx.n;
    let mut gates = Vec::new();
    if ctx.deformed {
        gates.push(Gate::DilationRotation { dagger: true });
    }
    let w_kind = if ctx.deformed { WKind::GWeighted } else { WKind::Undilated };
    match ctx.encoding {
        Encoding::Standard => {
            for _ in 0..k {
                gates.extend(pi_dagger_std(n));
            }
            gates.push(Gate::WPrep { dagger: true, kind: WKind::Dilated });
            gates.push(Gate::WPrep { dagger: false, kind: w_kind });
            for _ in 0..k {
                gates.extend(pi_std(n));
            }
        }
        Encoding::Yamanouchi => {
            for _ in 0..k {
                gates.extend(pi_dagger_yam(n));
            }
            for step in 2..=n.saturating_sub(1) {
                gates.push(Gate::Rec { step, dagger: false });
            }
            gates.push(Gate::YamWPrep { dagger: true, kind: WKind::Dilated });
            gates.push(Gate::YamWPrep { dagger: false, kind: w_kind });
            gates.extend(unrecord(n.saturating_sub(1)));
            for _ in 0..k {
                gates.extend(pi_yam(n));
            }
        }
    }
    gates
}

/// Synthesize the full measurement circuit. With a deformation `g` the
/// circuit gains the dilation qubit and branch rotations; `with_corr`
/// enables the post-measurement correction pass in the simulator.
pub fn synth_measurement(
    n: usize,
    d: usize,
    encoding: Encoding,
    g: Option<&GDiag>,
    with_corr: bool,
) -> Result<MeasurementCircuit> {
    let ctx = MeasurementContext::new(n, d, encoding, g)?;
    if with_corr && ctx.deformed {
        // The G-weighted correction column must exist for every wedge leaf.
        for info in ctx.wedge.iter().flatten() {
            if info.w_gweighted.is_none() {
                return Err(Error::InvalidArgument(format!(
                    "G vanishes on every branch of {}, correction column undefined",
                    info.lam
                )));
            }
        }
    }
    let gates = measurement_gates(&ctx);
    Ok(MeasurementCircuit { ctx, gates, with_corr })
}

/// Single-fragment circuits used by the synthesis tests and the CLI.
pub fn synth_transposition_std(i: usize, n: usize, d: usize) -> Result<MeasurementCircuit> {
    let ctx = MeasurementContext::new(n, d, Encoding::Standard, None)?;
    Ok(MeasurementCircuit { ctx, gates: vec![Gate::Transposition { i }], with_corr: false })
}

pub fn synth_cyclic_std(n: usize, d: usize) -> Result<MeasurementCircuit> {
    let ctx = MeasurementContext::new(n, d, Encoding::Standard, None)?;
    Ok(MeasurementCircuit { ctx, gates: pi_dagger_std(n), with_corr: false })
}

pub fn synth_w(n: usize, d: usize, kind: WKind) -> Result<MeasurementCircuit> {
    let ctx = MeasurementContext::new(n, d, Encoding::Standard, None)?;
    Ok(MeasurementCircuit {
        ctx,
        gates: vec![Gate::WPrep { dagger: false, kind }],
        with_corr: false,
    })
}

pub fn synth_yamanouchi_transposition(
    i: usize,
    n: usize,
    d: usize,
) -> Result<MeasurementCircuit> {
    if i < 1 || i + 1 > n {
        return Err(Error::IndexOutOfRange {
            index: i,
            what: "transposition index",
            range: format!("1..={}", n.saturating_sub(1)),
        });
    }
    let ctx = MeasurementContext::new(n, d, Encoding::Yamanouchi, None)?;
    let mut gates = Vec::new();
    for step in 2..i {
        gates.push(Gate::Rec { step, dagger: false });
    }
    gates.push(Gate::YamCore { i });
    gates.extend(unrecord(i.saturating_sub(1)));
    Ok(MeasurementCircuit { ctx, gates, with_corr: false })
}

pub fn synth_cyclic_yam(n: usize, d: usize) -> Result<MeasurementCircuit> {
    let ctx = MeasurementContext::new(n, d, Encoding::Yamanouchi, None)?;
    Ok(MeasurementCircuit { ctx, gates: pi_dagger_yam(n), with_corr: false })
}

/// Random product state on `n+1` qudits.
pub fn random_product_state(n: usize, d: usize, rng: &mut impl Rng) -> CVec {
    let mut state = CVec::from_elem(1, c(1.0));
    for _ in 0..=n {
        let mut qudit: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm: f64 = qudit.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        qudit.iter_mut().for_each(|z| *z /= norm);
        let mut next = CVec::zeros(state.len() * d);
        for (i, &a) in state.iter().enumerate() {
            for (j, &b) in qudit.iter().enumerate() {
                next[i * d + j] = a * b;
            }
        }
        state = next;
    }
    state
}

/// Circuit-vs-POVM comparison on random product inputs.
#[derive(Clone, Debug, serde::Serialize)]
pub struct SimulationReport {
    pub n: usize,
    pub d: usize,
    pub encoding: Encoding,
    pub deformed: bool,
    pub with_corr: bool,
    pub seed: u64,
    pub num_inputs: usize,
    /// Largest total-variation distance between simulated and exact outcome
    /// distributions over the inputs.
    pub max_tv_distance: f64,
    /// Smallest post-measurement fidelity against the square-root Kraus
    /// target, over inputs and outcomes (1.0 when no correction ran).
    pub min_corr_fidelity: f64,
    /// Largest embedding leakage seen while reading states back out.
    pub max_leakage: f64,
}

/// Simulate the measurement circuit on random product inputs and compare
/// with the exact POVM distribution `Tr[E_k ρ]`; with the correction pass,
/// also compare post-measurement states against `√E_k |ψ⟩` (deformed: `E*`).
pub fn simulate_vs_povm(
    n: usize,
    d: usize,
    encoding: Encoding,
    deformed: bool,
    with_corr: bool,
    num_inputs: usize,
    seed: u64,
    guard: usize,
) -> Result<SimulationReport> {
    use rand::SeedableRng;
    let g = if deformed {
        Some(crate::measurements::g_epr_ppbt(n, d))
    } else {
        None
    };
    let circuit = synth_measurement(n, d, encoding, g.as_ref(), with_corr)?;
    let schur = crate::algebra::solve_intertwiner(n, d, guard)?;

    // Exact POVM in the computational basis.
    let exact: Vec<Array2<Complex64>> = if deformed {
        let bu = crate::bratteli::BratteliDiagram::build(n, d, false)?;
        let idx = crate::bratteli::PathIndexer::new(&bu);
        let block = generic_povm(&bu, &idx, g.as_ref().unwrap())?;
        block
            .outcomes
            .iter()
            .map(|o| schur.block_to_dense(o))
            .collect()
    } else {
        pgm_bruteforce(n, d, guard)?.outcomes
    };
    let sqrt_exact: Vec<Array2<Complex64>> = exact
        .iter()
        .map(|e| psd_sqrt(e, 1e-9))
        .collect::<Result<_>>()?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_tv = 0.0f64;
    let mut min_fid = 1.0f64;
    let mut max_leak = 0.0f64;
    for _ in 0..num_inputs {
        let psi = random_product_state(n, d, &mut rng);
        let run = super::sim::run_measurement(&circuit, &schur, &psi)?;
        let mut tv = 0.0;
        for k in 0..=n {
            let expected: f64 = {
                let epsi = exact[k].dot(&psi);
                psi.iter().zip(epsi.iter()).map(|(a, b)| (a.conj() * b).re).sum()
            };
            tv += (run.probs[k] - expected).abs();
        }
        max_tv = max_tv.max(tv / 2.0);
        max_leak = max_leak.max(run.leakage);
        if with_corr {
            for k in 1..=n {
                let Some(out) = &run.post_states[k] else { continue };
                let mut target = sqrt_exact[k].dot(&psi);
                let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-9 {
                    continue;
                }
                target.mapv_inplace(|z| z / norm);
                let overlap: Complex64 = target
                    .iter()
                    .zip(out.iter())
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                min_fid = min_fid.min(overlap.norm_sqr());
            }
        }
    }
    Ok(SimulationReport {
        n,
        d,
        encoding,
        deformed,
        with_corr,
        seed,
        num_inputs,
        max_tv_distance: max_tv,
        min_corr_fidelity: min_fid,
        max_leakage: max_leak,
    })
}

/// Direct check that the synthesized round chain realizes
/// `V^i = Σ_k ω^{ki} Π_k + Π_0` on the embedded path space.
pub fn verify_phase_estimation_operator(
    n: usize,
    d: usize,
    encoding: Encoding,
    phase_value: usize,
) -> Result<f64> {
    let circuit = synth_measurement(n, d, encoding, None, false)?;
    // Strip the Schur block and the Fourier gates: keep the round chain.
    let rounds: Vec<Gate> = circuit
        .gates
        .iter()
        .filter(|g| {
            !matches!(g, Gate::SchurBlock { .. } | Gate::Qft { .. })
        })
        .cloned()
        .collect();
    let op = super::sim::path_space_operator(&circuit, &rounds, phase_value)?;

    // Expected: block sum of the dilated PVM with phases.
    let pvm = crate::measurements::dilated_pvm(&circuit.ctx.diagram, &circuit.ctx.paths)?;
    let dim = op.nrows();
    let mut expected = Array2::<Complex64>::zeros((dim, dim));
    let mut offset = 0usize;
    let leaves = circuit.ctx.diagram.leaves().len();
    let offsets: Vec<usize> = (0..leaves)
        .map(|l| {
            let o = offset;
            offset += circuit.ctx.paths.dim(l);
            o
        })
        .collect();
    for k in 0..=n {
        let phase = {
            let angle = 2.0 * std::f64::consts::PI
                * ((k * phase_value) % (n + 1)) as f64
                / (n + 1) as f64;
            Complex64::new(angle.cos(), angle.sin())
        };
        for l in 0..leaves {
            let block = &pvm.outcomes[k].blocks[l];
            for t in 0..block.nrows() {
                for t2 in 0..block.ncols() {
                    expected[[offsets[l] + t, offsets[l] + t2]] += phase * block[[t, t2]];
                }
            }
        }
    }
    // Unitarity of the reconstructed operator.
    let unit = max_abs_diff(&op.dot(&dagger(&op)), &Array2::eye(dim));
    Ok(max_abs_diff(&op, &expected).max(unit))
}
