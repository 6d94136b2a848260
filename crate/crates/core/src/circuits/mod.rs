//! Gate-level synthesis of the PBT measurement circuits in the standard and
//! Yamanouchi path encodings, the resource-prep path circuit, a deterministic
//! statevector simulator over named qudit registers, and gate-count /
//! scheduling reports for the complexity claims.
//!
//! The mixed-Schur transform itself enters as one abstract `SchurBlock`
//! realized by the dense intertwiner; its internals are out of scope and it
//! is excluded from gate totals.

mod context;
mod counts;
mod prep;
mod sim;
mod synth;

pub use context::{Encoding, MeasurementContext, Register, RegisterKind, WedgeInfo};
pub use counts::{
    asap_time_units, count_row, elementary_counts, gate_count_report, log_log_fit, CountRow,
    GateCountReport,
};
pub use prep::{synth_resource_prep, terminal_amplitudes, PrepCircuit};
pub use sim::{path_space_operator, run_measurement, MeasurementRun, SimState};
pub use synth::{
    corr_gates, measurement_gates, random_product_state, simulate_vs_povm, synth_cyclic_std,
    synth_cyclic_yam, synth_measurement, synth_transposition_std, synth_w,
    synth_yamanouchi_transposition, verify_phase_estimation_operator, MeasurementCircuit,
    SimulationReport,
};

use serde::Serialize;

/// Which column-preparation unitary a `WPrep`-style gate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WKind {
    /// `W̃_λ`: unit-norm column over the unrestricted addable set.
    Dilated,
    /// `W_λ`: normalized column over the d-bounded addable set.
    Undilated,
    /// G-weighted normalized column, used by the deformed correction.
    GWeighted,
}

/// One abstract gate. Parameters are derived from exact branching ratios at
/// application time; controls are register-value predicates baked into the
/// gate semantics.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Gate {
    /// The mixed quantum Schur transform block (excluded from gate totals).
    SchurBlock { inverse: bool },
    /// Standard-encoding transposition fragment σ_i on (T^{i-1}, T^i, T^{i+1}).
    Transposition { i: usize },
    /// Standard-encoding λ-controlled column preparation on T^n.
    WPrep { dagger: bool, kind: WKind },
    /// Phase ω_{n+1}^{round·i} on the marked states, i read from the phase
    /// register (open-controlled on the dilation qubit when present).
    PhaseMark { round: usize },
    /// Fourier transform on the phase register.
    Qft { dagger: bool },
    /// U_{λ,a} on the dilation qubit, controlled on the branch cell.
    DilationRotation { dagger: bool },
    /// Yamanouchi recording: advance the work register from level `step-1`
    /// to `step`, consuming `y_step`.
    Rec { step: usize, dagger: bool },
    /// Yamanouchi transposition core on (y_i, y_{i+1}, location), controlled
    /// on the recorded T^{i-1}.
    YamCore { i: usize },
    /// Yamanouchi λ-controlled column preparation on (y_n, y_{n+1}, location).
    YamWPrep { dagger: bool, kind: WKind },
    /// Yamanouchi phase mark, additionally controlled on the work register.
    YamPhaseMark { round: usize },
    /// Resource-prep branching gate on path register `level`.
    FGate { level: usize },
    /// Resource-prep mirror copy T^level → T^{2n-level}.
    CopyGate { level: usize },
}
