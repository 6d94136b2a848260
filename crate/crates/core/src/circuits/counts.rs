//! Gate-count accounting and resource-aware scheduling. Totals exclude the
//! abstract Schur block, which is accounted separately. The exponent fit
//! runs on scheduled time units: gates on disjoint registers may share a
//! time slot, which is what separates the two encodings (the standard
//! encoding pipelines its transposition staircases; the Yamanouchi encoding
//! serializes everything through the work register).

use std::collections::BTreeMap;

use serde::Serialize;

use super::context::{Encoding, MeasurementContext};
use super::synth::MeasurementCircuit;
use super::Gate;

/// Elementary-operation decomposition of one abstract gate.
pub fn elementary_counts(gate: &Gate, d: usize) -> Vec<(&'static str, usize)> {
    let rot_jk = (d + 1) * d / 2;
    match gate {
        Gate::SchurBlock { .. } => vec![("schur", 1)],
        Gate::Transposition { .. } => vec![("rot_jk", rot_jk), ("reg_arith", 4)],
        Gate::WPrep { .. } => vec![("prep_rot", d + 1), ("reg_arith", 2 * (d + 1))],
        Gate::PhaseMark { .. } | Gate::YamPhaseMark { .. } => vec![("phase", 1)],
        Gate::Qft { .. } => vec![("qft", 1)],
        Gate::DilationRotation { .. } => vec![("dilation_rot", 1)],
        Gate::Rec { .. } => vec![("rec", 1)],
        Gate::YamCore { .. } => vec![("rot_jk", rot_jk)],
        Gate::YamWPrep { .. } => vec![("prep_rot", d + 1), ("reg_arith", 2)],
        Gate::FGate { .. } => vec![("prep_rot", d), ("reg_arith", 2)],
        Gate::CopyGate { .. } => vec![("copy", 1)],
    }
}

fn touched_registers(ctx: &MeasurementContext, gate: &Gate) -> Vec<usize> {
    let n = ctx.n;
    match gate {
        Gate::SchurBlock { .. } => Vec::new(),
        Gate::Transposition { i } => {
            let mut regs = Vec::new();
            for k in [i.wrapping_sub(1), *i, i + 1] {
                if (2..=n).contains(&k) {
                    regs.push(ctx.reg_t[k].unwrap());
                }
            }
            regs.sort_unstable();
            regs.dedup();
            regs
        }
        Gate::WPrep { .. } => {
            let mut regs = vec![ctx.reg_t[n].unwrap(), ctx.reg_lam];
            if n >= 3 {
                regs.push(ctx.reg_t[n - 1].unwrap());
            }
            regs
        }
        Gate::PhaseMark { .. } => {
            let mut regs = vec![ctx.reg_t[n].unwrap(), ctx.reg_lam, ctx.reg_p];
            if n >= 3 {
                regs.push(ctx.reg_t[n - 1].unwrap());
            }
            if let Some(q) = ctx.reg_q {
                regs.push(q);
            }
            regs
        }
        Gate::Qft { .. } => vec![ctx.reg_p],
        Gate::DilationRotation { .. } => {
            let mut regs = vec![ctx.reg_lam, ctx.reg_q.unwrap()];
            match ctx.encoding {
                Encoding::Standard => regs.push(ctx.reg_t[n].unwrap()),
                Encoding::Yamanouchi => regs.push(ctx.reg_y[n + 1].unwrap()),
            }
            regs
        }
        Gate::Rec { step, .. } => vec![ctx.reg_wu.unwrap(), ctx.reg_y[*step].unwrap()],
        Gate::YamCore { i } => {
            if *i == 1 {
                vec![ctx.reg_y[2].unwrap()]
            } else {
                vec![
                    ctx.reg_wu.unwrap(),
                    ctx.reg_y[*i].unwrap(),
                    ctx.reg_y[i + 1].unwrap(),
                    ctx.reg_loc.unwrap(),
                ]
            }
        }
        Gate::YamWPrep { .. } => vec![
            ctx.reg_wu.unwrap(),
            ctx.reg_y[n].unwrap(),
            ctx.reg_y[n + 1].unwrap(),
            ctx.reg_loc.unwrap(),
            ctx.reg_lam,
        ],
        Gate::YamPhaseMark { .. } => {
            let mut regs = vec![
                ctx.reg_wu.unwrap(),
                ctx.reg_y[n].unwrap(),
                ctx.reg_y[n + 1].unwrap(),
                ctx.reg_loc.unwrap(),
                ctx.reg_lam,
                ctx.reg_p,
            ];
            if let Some(q) = ctx.reg_q {
                regs.push(q);
            }
            regs
        }
        Gate::FGate { .. } | Gate::CopyGate { .. } => Vec::new(),
    }
}

/// Resource-aware as-soon-as-possible schedule: each gate occupies its
/// touched registers for as many time units as its elementary count; gates
/// on disjoint registers overlap. Returns the makespan.
pub fn asap_time_units(circuit: &MeasurementCircuit) -> usize {
    let ctx = &circuit.ctx;
    let mut free = vec![0usize; ctx.registers.len()];
    let mut makespan = 0usize;
    for gate in &circuit.gates {
        if matches!(gate, Gate::SchurBlock { .. }) {
            continue;
        }
        let duration: usize = elementary_counts(gate, ctx.d).iter().map(|&(_, c)| c).sum();
        let regs = touched_registers(ctx, gate);
        let start = regs.iter().map(|&r| free[r]).max().unwrap_or(0);
        let end = start + duration;
        for &r in &regs {
            free[r] = end;
        }
        makespan = makespan.max(end);
    }
    makespan
}

#[derive(Clone, Debug, Serialize)]
pub struct CountRow {
    pub n: usize,
    pub counts: BTreeMap<String, usize>,
    /// Elementary gates excluding the Schur block.
    pub total_gates: usize,
    /// ASAP-scheduled time units (the quantity fitted against n).
    pub time_units: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateCountReport {
    pub encoding: Encoding,
    pub d: usize,
    pub rows: Vec<CountRow>,
    /// Least-squares slope of ln(time_units) against ln(n).
    pub fit_exponent: f64,
    /// RMS residual of the fit.
    pub fit_residual: f64,
}

pub fn count_row(circuit: &MeasurementCircuit) -> CountRow {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for gate in &circuit.gates {
        for (kind, c) in elementary_counts(gate, circuit.ctx.d) {
            *counts.entry(kind.to_string()).or_insert(0) += c;
        }
    }
    let total_gates = counts
        .iter()
        .filter(|(k, _)| k.as_str() != "schur")
        .map(|(_, &v)| v)
        .sum();
    CountRow {
        n: circuit.ctx.n,
        counts,
        total_gates,
        time_units: asap_time_units(circuit),
    }
}

/// Synthesize the measurement circuit over a range of port counts and fit
/// the scaling exponent of the scheduled time.
pub fn gate_count_report(
    encoding: Encoding,
    d: usize,
    ns: &[usize],
) -> crate::error::Result<GateCountReport> {
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let circuit = super::synth::synth_measurement(n, d, encoding, None, false)?;
        rows.push(count_row(&circuit));
    }
    let (fit_exponent, fit_residual) = log_log_fit(
        &rows.iter().map(|r| r.n as f64).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.time_units as f64).collect::<Vec<_>>(),
    );
    Ok(GateCountReport { encoding, d, rows, fit_exponent, fit_residual })
}

/// Least-squares slope and RMS residual of ln(y) against ln(x).
pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, rms)
}
