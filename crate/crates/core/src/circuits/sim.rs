//! Deterministic statevector simulator over named qudit registers. Gates are
//! applied as structured updates on basis states; invalid (non-path) basis
//! states are left untouched, which keeps every gate unitary on the full
//! product space.

use ndarray::Array2;
use num_complex::Complex64;

use crate::algebra::{c, CVec, SchurIntertwiner};
use crate::bratteli::Path;
use crate::error::{Error, Result};
use crate::partitions::{Cell, Partition};

use super::context::{Encoding, MeasurementContext};
use super::synth::MeasurementCircuit;
use super::{Gate, WKind};

#[derive(Clone, Debug)]
pub struct SimState {
    pub amps: Vec<Complex64>,
}

impl SimState {
    pub fn zeros(dim: usize) -> Self {
        SimState { amps: vec![Complex64::default(); dim] }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }
}

fn omega(n_plus_1: usize, power: i64) -> Complex64 {
    let angle = 2.0 * std::f64::consts::PI * (power.rem_euclid(n_plus_1 as i64) as f64)
        / n_plus_1 as f64;
    Complex64::new(angle.cos(), angle.sin())
}

/// Apply a small real unitary on the amplitudes of `register` restricted to
/// `support` (list of register values), for every basis combination of the
/// other registers that passes `control`.
fn apply_on_support(
    ctx: &MeasurementContext,
    state: &mut SimState,
    register: usize,
    support: &[usize],
    unitary: &Array2<f64>,
    dagger: bool,
    control: impl Fn(&[usize]) -> bool,
) {
    let stride = ctx.strides[register];
    let dim = ctx.registers[register].dim;
    let block = stride * dim;
    let total = ctx.total_dim;
    let m = support.len();
    let mut gathered = vec![Complex64::default(); m];
    for base in (0..total).step_by(block) {
        for off in 0..stride {
            let idx0 = base + off;
            let values = ctx.decode(idx0);
            if !control(&values) {
                continue;
            }
            for (j, &v) in support.iter().enumerate() {
                gathered[j] = state.amps[idx0 + v * stride];
            }
            for (i, &vi) in support.iter().enumerate() {
                let mut acc = Complex64::default();
                for (j, &g) in gathered.iter().enumerate() {
                    let u = if dagger { unitary[[j, i]] } else { unitary[[i, j]] };
                    acc += g * u;
                }
                state.amps[idx0 + vi * stride] = acc;
            }
        }
    }
}

fn wedge_marker_control_std(ctx: &MeasurementContext, values: &[usize]) -> Option<usize> {
    // Returns the wedge leaf index when the state sits on T^{n-1} = λ of a
    // wedge leaf; the level n-1 register is implicit for n = 2.
    let leaf = values[ctx.reg_lam];
    let info = ctx.wedge.get(leaf)?.as_ref()?;
    if ctx.n >= 3 {
        let t = values[ctx.reg_t[ctx.n - 1].unwrap()];
        if t != info.lam_level_idx {
            return None;
        }
    }
    Some(leaf)
}

fn wedge_marker_control_yam(ctx: &MeasurementContext, values: &[usize]) -> Option<usize> {
    let leaf = values[ctx.reg_lam];
    let info = ctx.wedge.get(leaf)?.as_ref()?;
    let wu = values[ctx.reg_wu.unwrap()];
    // The work register holds the level n-1 vertex at this point.
    if wu != info.lam_level_idx {
        return None;
    }
    Some(leaf)
}

/// Vertex of the dilated diagram obtained by adding a cell in `row` to
/// `base`, when that stays inside the diagram.
fn add_row(
    ctx: &MeasurementContext,
    level: usize,
    base: &Partition,
    row: usize,
) -> Option<(usize, Cell)> {
    let cell = Cell::new(row, base.row(row) + 1);
    let grown = base.with_cell(cell).ok()?;
    let idx = ctx.diagram.vertex_index(level, &grown)?;
    Some((idx, cell))
}

fn apply_transposition_std(ctx: &MeasurementContext, state: &mut SimState, i: usize) {
    let n = ctx.n;
    debug_assert!(i >= 1 && i < n);
    let reg_i = if i >= 2 { ctx.reg_t[i] } else { None };
    for idx in 0..ctx.total_dim {
        let values = ctx.decode(idx);
        let Some(mu_idx) = ctx.level_value(&values, i - 1) else { continue };
        let Some(kappa_idx) = ctx.level_value(&values, i) else { continue };
        let Some(nu_idx) = ctx.level_value(&values, i + 1) else { continue };
        let mu = ctx.diagram.vertex(i - 1, mu_idx);
        let kappa = ctx.diagram.vertex(i, kappa_idx);
        let nu = ctx.diagram.vertex(i + 1, nu_idx);
        let Some(first) = kappa.single_cell_diff(mu) else { continue };
        let Some(second) = nu.single_cell_diff(kappa) else { continue };
        let r = (second.content() - first.content()) as f64;
        // Other intermediate vertex, if the diagram holds it.
        let partner = ctx
            .diagram
            .children(i - 1, mu_idx)
            .iter()
            .copied()
            .find(|&kp| kp != kappa_idx && ctx.diagram.has_edge(i, kp, nu_idx));
        match partner {
            None => {
                debug_assert!(r.abs() == 1.0);
                state.amps[idx] *= c(1.0 / r);
            }
            Some(kp) => {
                let reg = reg_i.expect("levels 0/1 have a unique vertex");
                let stride = ctx.strides[reg];
                let pidx = (idx as i64 + (kp as i64 - kappa_idx as i64) * stride as i64) as usize;
                if pidx < idx {
                    continue; // pair handled when visiting the partner
                }
                let s = (1.0 - 1.0 / (r * r)).sqrt();
                let a = state.amps[idx];
                let b = state.amps[pidx];
                state.amps[idx] = a * (1.0 / r) + b * s;
                state.amps[pidx] = a * s + b * (-1.0 / r);
            }
        }
    }
}

fn apply_yam_core(ctx: &MeasurementContext, state: &mut SimState, i: usize) {
    let n = ctx.n;
    let d = ctx.d;
    if i == 1 {
        // Diagonal ±1 on y_2: the level-1 vertex is fixed.
        let reg = ctx.reg_y[2].unwrap();
        for idx in 0..ctx.total_dim {
            let values = ctx.decode(idx);
            let row = values[reg] + 1;
            let sign = match row {
                1 => 1.0,
                2 => -1.0,
                _ => 1.0, // invalid addition, identity
            };
            if sign < 0.0 {
                state.amps[idx] = -state.amps[idx];
            }
        }
        return;
    }
    debug_assert!(i >= 2 && i < n);
    let reg_yi = ctx.reg_y[i].unwrap();
    let reg_yi1 = ctx.reg_y[i + 1].unwrap();
    let reg_loc = ctx.reg_loc.unwrap();
    let reg_wu = ctx.reg_wu.unwrap();
    for idx in 0..ctx.total_dim {
        let values = ctx.decode(idx);
        let wu = values[reg_wu];
        if wu >= ctx.diagram.level(i - 1).len() {
            continue;
        }
        let mu = ctx.diagram.vertex(i - 1, wu);
        let j = values[reg_yi] + 1;
        let k = values[reg_yi1] + 1;
        let loc = values[reg_loc];
        // Local dilation-location consistency.
        if (j == d + 1 && loc != i) || (k == d + 1 && loc != i + 1) {
            continue;
        }
        if j != d + 1 && k != d + 1 && (loc == i || loc == i + 1) {
            continue;
        }
        let Some((kappa_idx, first)) = add_row(ctx, i, mu, j) else { continue };
        let kappa = ctx.diagram.vertex(i, kappa_idx).clone();
        let Some((_, second)) = add_row(ctx, i + 1, &kappa, k) else { continue };
        if j == k {
            continue; // same row twice: r = 1, identity
        }
        let r = (second.content() - first.content()) as f64;
        // Partner: add row k first, then row j.
        let partner_valid = add_row(ctx, i, mu, k)
            .and_then(|(kp, _)| {
                let kappa2 = ctx.diagram.vertex(i, kp).clone();
                add_row(ctx, i + 1, &kappa2, j)
            })
            .is_some();
        if !partner_valid {
            debug_assert!(r.abs() == 1.0, "missing partner forces |r| = 1, got {r}");
            state.amps[idx] *= c(1.0 / r);
            continue;
        }
        // Swap (y_i, y_{i+1}) and move the dilation location along.
        let new_loc = if j == d + 1 {
            i + 1
        } else if k == d + 1 {
            i
        } else {
            loc
        };
        let mut pvalues = values.clone();
        pvalues[reg_yi] = k - 1;
        pvalues[reg_yi1] = j - 1;
        pvalues[reg_loc] = new_loc;
        let pidx = ctx.index_of(&pvalues);
        if pidx < idx {
            continue;
        }
        let s = (1.0 - 1.0 / (r * r)).sqrt();
        let a = state.amps[idx];
        let b = state.amps[pidx];
        state.amps[idx] = a * (1.0 / r) + b * s;
        state.amps[pidx] = a * s + b * (-1.0 / r);
    }
}

fn apply_w_std(ctx: &MeasurementContext, state: &mut SimState, dagger: bool, kind: WKind) {
    let reg = ctx.reg_t[ctx.n].unwrap();
    for (leaf, info) in ctx.wedge.iter().enumerate() {
        let Some(info) = info else { continue };
        let (support, unitary): (&[usize], &Array2<f64>) = match kind {
            WKind::Dilated => (&info.branch_vertices, &info.w_dilated),
            WKind::Undilated => (
                &info.branch_vertices[..info.undilated_len],
                &info.w_undilated,
            ),
            WKind::GWeighted => (
                &info.branch_vertices[..info.undilated_len],
                info.w_gweighted.as_ref().expect("deformed context"),
            ),
        };
        apply_on_support(ctx, state, reg, support, unitary, dagger, |values| {
            values[ctx.reg_lam] == leaf && wedge_marker_control_std(ctx, values) == Some(leaf)
        });
    }
}

fn apply_w_yam(ctx: &MeasurementContext, state: &mut SimState, dagger: bool, kind: WKind) {
    // Support states are the locked pairs (y_n, y_{n+1}) = (row, row) with
    // the location register tracking the dilated branch; gather them
    // explicitly per basis combination of the remaining registers.
    let n = ctx.n;
    let d = ctx.d;
    let reg_yn = ctx.reg_y[n].unwrap();
    let reg_yn1 = ctx.reg_y[n + 1].unwrap();
    let reg_loc = ctx.reg_loc.unwrap();
    for (leaf, info) in ctx.wedge.iter().enumerate() {
        let Some(info) = info else { continue };
        let (rows, unitary): (Vec<usize>, &Array2<f64>) = match kind {
            WKind::Dilated => (
                info.branch_cells.iter().map(|a| a.row).collect(),
                &info.w_dilated,
            ),
            WKind::Undilated => (
                info.branch_cells[..info.undilated_len]
                    .iter()
                    .map(|a| a.row)
                    .collect(),
                &info.w_undilated,
            ),
            WKind::GWeighted => (
                info.branch_cells[..info.undilated_len]
                    .iter()
                    .map(|a| a.row)
                    .collect(),
                info.w_gweighted.as_ref().expect("deformed context"),
            ),
        };
        let m = rows.len();
        // Support values as (y_n, y_{n+1}, loc) triples.
        let triples: Vec<(usize, usize, usize)> = rows
            .iter()
            .map(|&r| (r - 1, r - 1, if r == d + 1 { n } else { 0 }))
            .collect();
        let mut gathered = vec![Complex64::default(); m];
        for idx in 0..ctx.total_dim {
            let values = ctx.decode(idx);
            if values[ctx.reg_lam] != leaf {
                continue;
            }
            if (values[reg_yn], values[reg_yn1], values[reg_loc]) != triples[0] {
                continue; // orbit is visited from its first support state
            }
            if wedge_marker_control_yam(ctx, &values).is_none() {
                continue;
            }
            let mut idxs = Vec::with_capacity(m);
            for &(yn, yn1, loc) in &triples {
                let mut v2 = values.clone();
                v2[reg_yn] = yn;
                v2[reg_yn1] = yn1;
                v2[reg_loc] = loc;
                idxs.push(ctx.index_of(&v2));
            }
            for (j, &pos) in idxs.iter().enumerate() {
                gathered[j] = state.amps[pos];
            }
            for (i2, &pos) in idxs.iter().enumerate() {
                let mut acc = Complex64::default();
                for (j, &g) in gathered.iter().enumerate() {
                    let u = if dagger { unitary[[j, i2]] } else { unitary[[i2, j]] };
                    acc += g * u;
                }
                state.amps[pos] = acc;
            }
        }
    }
}

fn apply_phase_mark(ctx: &MeasurementContext, state: &mut SimState, round: usize, yam: bool) {
    let np1 = (ctx.n + 1) as i64;
    let _ = np1;
    for idx in 0..ctx.total_dim {
        if state.amps[idx].norm_sqr() == 0.0 {
            continue;
        }
        let values = ctx.decode(idx);
        let leaf = match if yam {
            wedge_marker_control_yam(ctx, &values)
        } else {
            wedge_marker_control_std(ctx, &values)
        } {
            Some(l) => l,
            None => continue,
        };
        let info = ctx.wedge[leaf].as_ref().unwrap();
        let marked = if yam {
            let yn = values[ctx.reg_y[ctx.n].unwrap()];
            let yn1 = values[ctx.reg_y[ctx.n + 1].unwrap()];
            let loc = values[ctx.reg_loc.unwrap()];
            yn == 0 && yn1 == 0 && loc == 0
        } else {
            values[ctx.reg_t[ctx.n].unwrap()] == info.branch_vertices[0]
        };
        if !marked {
            continue;
        }
        if let Some(q) = ctx.reg_q {
            if values[q] != 0 {
                continue;
            }
        }
        let p = values[ctx.reg_p] as i64;
        state.amps[idx] *= omega(ctx.n + 1, round as i64 * p);
    }
}

fn apply_qft(ctx: &MeasurementContext, state: &mut SimState, dagger: bool) {
    let reg = ctx.reg_p;
    let dim = ctx.registers[reg].dim;
    let scale = 1.0 / (dim as f64).sqrt();
    let stride = ctx.strides[reg];
    let block = stride * dim;
    let mut gathered = vec![Complex64::default(); dim];
    for base in (0..ctx.total_dim).step_by(block) {
        for off in 0..stride {
            let idx0 = base + off;
            for v in 0..dim {
                gathered[v] = state.amps[idx0 + v * stride];
            }
            for v in 0..dim {
                let mut acc = Complex64::default();
                for (u, &g) in gathered.iter().enumerate() {
                    let sign = if dagger { -1 } else { 1 };
                    acc += g * omega(dim, sign * (v * u) as i64);
                }
                state.amps[idx0 + v * stride] = acc * scale;
            }
        }
    }
}

fn apply_dilation_rotation(ctx: &MeasurementContext, state: &mut SimState, dagger: bool) {
    let reg_q = ctx.reg_q.expect("deformed circuit has a dilation qubit");
    let stride = ctx.strides[reg_q];
    for idx in 0..ctx.total_dim {
        let values = ctx.decode(idx);
        if values[reg_q] != 0 {
            continue; // process each qubit pair from its |0⟩ member
        }
        let leaf = values[ctx.reg_lam];
        let g = match ctx.wedge.get(leaf).and_then(|w| w.as_ref()) {
            Some(info) => {
                let branch = match ctx.encoding {
                    Encoding::Standard => {
                        let t = values[ctx.reg_t[ctx.n].unwrap()];
                        info.branch_vertices.iter().position(|&v| v == t)
                    }
                    Encoding::Yamanouchi => {
                        let row = values[ctx.reg_y[ctx.n + 1].unwrap()] + 1;
                        info.branch_cells.iter().position(|a| a.row == row)
                    }
                };
                match branch {
                    Some(j) => info.g_values[j],
                    None => continue, // not a valid branch state: identity
                }
            }
            // Boxed leaves carry G = 0.
            None => 0.0,
        };
        let sg = g.sqrt();
        let sc = (1.0 - g).sqrt();
        let i0 = idx;
        let i1 = idx + stride;
        let a = state.amps[i0];
        let b = state.amps[i1];
        if dagger {
            // U† = [[√g, √(1-g)], [-√(1-g), √g]]
            state.amps[i0] = a * sg + b * sc;
            state.amps[i1] = -a * sc + b * sg;
        } else {
            state.amps[i0] = a * sg - b * sc;
            state.amps[i1] = a * sc + b * sg;
        }
    }
}

fn apply_rec(ctx: &MeasurementContext, state: &mut SimState, step: usize, dagger: bool) {
    let reg_wu = ctx.reg_wu.unwrap();
    let reg_y = ctx.reg_y[step].unwrap();
    let wu_dim = ctx.registers[reg_wu].dim;
    let y_dim = ctx.registers[reg_y].dim;
    // Forward permutation on (wu, y): level step-1 vertex + row → level step
    // vertex, completed to a bijection on the leftovers.
    let pairs = wu_dim * y_dim;
    let mut fwd = vec![usize::MAX; pairs];
    let mut used_out = vec![false; pairs];
    let from_level = ctx.diagram.level(step - 1);
    for wu in 0..wu_dim.min(from_level.len()) {
        for y in 0..y_dim {
            let row = y + 1;
            if let Some((to, _)) = add_row(ctx, step, &from_level[wu], row) {
                let src = wu * y_dim + y;
                let dst = to * y_dim + y;
                fwd[src] = dst;
                used_out[dst] = true;
            }
        }
    }
    let mut leftovers_out: Vec<usize> = (0..pairs).filter(|&p| !used_out[p]).collect();
    leftovers_out.reverse();
    for src in 0..pairs {
        if fwd[src] == usize::MAX {
            fwd[src] = leftovers_out.pop().expect("bijection completion");
        }
    }

    let stride_wu = ctx.strides[reg_wu];
    let stride_y = ctx.strides[reg_y];
    let mut out = vec![Complex64::default(); ctx.total_dim];
    for idx in 0..ctx.total_dim {
        let amp = state.amps[idx];
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let values = ctx.decode(idx);
        let src = values[reg_wu] * y_dim + values[reg_y];
        let dst = if dagger {
            fwd.iter().position(|&v| v == src).expect("permutation")
        } else {
            fwd[src]
        };
        let (new_wu, new_y) = (dst / y_dim, dst % y_dim);
        let new_idx = (idx as i64
            + (new_wu as i64 - values[reg_wu] as i64) * stride_wu as i64
            + (new_y as i64 - values[reg_y] as i64) * stride_y as i64) as usize;
        out[new_idx] = amp;
    }
    state.amps = out;
}

pub(crate) fn apply_gate(ctx: &MeasurementContext, state: &mut SimState, gate: &Gate) {
    match gate {
        Gate::SchurBlock { .. } => {} // realized by the embedding harness
        Gate::Transposition { i } => apply_transposition_std(ctx, state, *i),
        Gate::WPrep { dagger, kind } => apply_w_std(ctx, state, *dagger, *kind),
        Gate::PhaseMark { round } => apply_phase_mark(ctx, state, *round, false),
        Gate::Qft { dagger } => apply_qft(ctx, state, *dagger),
        Gate::DilationRotation { dagger } => apply_dilation_rotation(ctx, state, *dagger),
        Gate::Rec { step, dagger } => apply_rec(ctx, state, *step, *dagger),
        Gate::YamCore { i } => apply_yam_core(ctx, state, *i),
        Gate::YamWPrep { dagger, kind } => apply_w_yam(ctx, state, *dagger, *kind),
        Gate::YamPhaseMark { round } => apply_phase_mark(ctx, state, *round, true),
        Gate::FGate { .. } | Gate::CopyGate { .. } => {
            unreachable!("prep gates do not appear in measurement circuits")
        }
    }
}

/// Register values encoding one GT basis label.
fn label_values(
    ctx: &MeasurementContext,
    path: &Path,
    mult: usize,
    phase_value: usize,
) -> Vec<usize> {
    let mut values = vec![0usize; ctx.registers.len()];
    values[ctx.reg_mult] = mult;
    values[ctx.reg_lam] = path.leaf;
    values[ctx.reg_p] = phase_value;
    match ctx.encoding {
        Encoding::Standard => {
            for k in 2..=ctx.n {
                values[ctx.reg_t[k].unwrap()] = path.vertices[k];
            }
        }
        Encoding::Yamanouchi => {
            let word = ctx.diagram.to_yamanouchi(path).expect("valid path");
            let mut loc = 0usize;
            for pos in 2..=(ctx.n + 1) {
                let row = word.rows[pos - 2];
                values[ctx.reg_y[pos].unwrap()] = row - 1;
                if row == ctx.d + 1 && pos <= ctx.n {
                    loc = pos;
                }
            }
            values[ctx.reg_loc.unwrap()] = loc;
        }
    }
    values
}

/// Result of simulating one measurement circuit on one input.
#[derive(Clone, Debug)]
pub struct MeasurementRun {
    /// Outcome distribution over k = 0..n.
    pub probs: Vec<f64>,
    /// Post-measurement computational-basis states per outcome k ≥ 1
    /// (normalized), present when the correction pass ran and the outcome
    /// has nonzero probability.
    pub post_states: Vec<Option<CVec>>,
    /// Largest amplitude mass found outside the embedded GT basis or on
    /// unclean ancillas during un-embedding.
    pub leakage: f64,
}

/// Run a measurement circuit on a computational-basis input vector.
pub fn run_measurement(
    circuit: &MeasurementCircuit,
    schur: &SchurIntertwiner,
    input: &CVec,
) -> Result<MeasurementRun> {
    let ctx = &circuit.ctx;
    let comp_dim = ctx.d.pow((ctx.n + 1) as u32);
    if input.len() != comp_dim {
        return Err(Error::InvalidArgument(format!(
            "input dimension {} != d^(n+1) = {comp_dim}",
            input.len()
        )));
    }
    if schur.n != ctx.n || schur.d != ctx.d {
        return Err(Error::InvalidArgument("intertwiner shape mismatch".into()));
    }

    // Embed: computational → GT labels → register basis.
    let gt = schur.u.dot(input);
    let mut state = SimState::zeros(ctx.total_dim);
    let undilated = crate::bratteli::BratteliDiagram::build(ctx.n, ctx.d, false)?;
    let upaths = crate::bratteli::PathIndexer::new(&undilated);
    for leaf in 0..undilated.leaves().len() {
        let m_l = schur.mult_dims[leaf];
        for (t, path) in upaths.paths(leaf).iter().enumerate() {
            let emb = crate::measurements::embed_path(&undilated, &ctx.diagram, path);
            for mult in 0..m_l {
                let row = schur.row(leaf, t, mult);
                let values = label_values(ctx, &emb, mult, 0);
                state.amps[ctx.index_of(&values)] = gt[row];
            }
        }
    }

    for gate in &circuit.gates {
        apply_gate(ctx, &mut state, gate);
    }

    // Outcome distribution from the phase register.
    let n_out = ctx.n + 1;
    let mut probs = vec![0.0f64; n_out];
    let stride_p = ctx.strides[ctx.reg_p];
    for idx in 0..ctx.total_dim {
        let a = state.amps[idx].norm_sqr();
        if a == 0.0 {
            continue;
        }
        let p = (idx / stride_p) % n_out;
        probs[p] += a;
    }

    let mut post_states = vec![None; n_out];
    let mut leakage = 0.0f64;
    if circuit.with_corr {
        for k in 1..=ctx.n {
            if probs[k] < 1e-12 {
                continue;
            }
            // Project the phase register on k and renormalize.
            let mut projected = SimState::zeros(ctx.total_dim);
            for idx in 0..ctx.total_dim {
                if (idx / stride_p) % n_out == k {
                    projected.amps[idx] = state.amps[idx];
                }
            }
            let norm = projected.norm_sqr().sqrt();
            projected.amps.iter_mut().for_each(|z| *z /= norm);
            for gate in super::synth::corr_gates(ctx, k) {
                apply_gate(ctx, &mut projected, &gate);
            }
            // Un-embed: read off the undilated GT labels with clean ancillas.
            let mut gt_out = CVec::zeros(schur.dim());
            let mut captured = 0.0f64;
            for leaf in 0..undilated.leaves().len() {
                let m_l = schur.mult_dims[leaf];
                for (t, path) in upaths.paths(leaf).iter().enumerate() {
                    let emb = crate::measurements::embed_path(&undilated, &ctx.diagram, path);
                    for mult in 0..m_l {
                        let row = schur.row(leaf, t, mult);
                        let values = label_values(ctx, &emb, mult, k);
                        let amp = projected.amps[ctx.index_of(&values)];
                        gt_out[row] = amp;
                        captured += amp.norm_sqr();
                    }
                }
            }
            leakage = leakage.max((1.0 - captured).abs());
            let comp = crate::algebra::dagger(&schur.u).dot(&gt_out);
            post_states[k] = Some(comp);
        }
    }

    Ok(MeasurementRun { probs, post_states, leakage })
}

/// Reconstruct the unitary implemented by a gate subsequence on the embedded
/// path space with the phase register frozen at `phase_value`. Used by the
/// phase-estimation correctness checks.
pub fn path_space_operator(
    circuit: &MeasurementCircuit,
    gates: &[Gate],
    phase_value: usize,
) -> Result<Array2<Complex64>> {
    let ctx = &circuit.ctx;
    let dim: usize = (0..ctx.diagram.leaves().len())
        .map(|l| ctx.paths.dim(l))
        .sum();
    let mut columns = Vec::with_capacity(dim);
    let mut col_values = Vec::with_capacity(dim);
    for leaf in 0..ctx.diagram.leaves().len() {
        for path in ctx.paths.paths(leaf) {
            col_values.push(label_values(ctx, path, 0, phase_value));
        }
    }
    for values in &col_values {
        let mut state = SimState::zeros(ctx.total_dim);
        state.amps[ctx.index_of(values)] = c(1.0);
        for gate in gates {
            apply_gate(ctx, &mut state, gate);
        }
        let mut col = CVec::zeros(dim);
        for (row, rv) in col_values.iter().enumerate() {
            col[row] = state.amps[ctx.index_of(rv)];
        }
        columns.push(col);
    }
    let mut m = Array2::zeros((dim, dim));
    for (j, col) in columns.iter().enumerate() {
        for i in 0..dim {
            m[[i, j]] = col[i];
        }
    }
    Ok(m)
}
