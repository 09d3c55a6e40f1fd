//! Overlap estimation circuits.
//!
//! Three routes to the inner product of two encoded patches:
//!
//! * `hadamard_overlap` interferes the two state preparations on one
//!   ancilla and reads Re<w|k> with its sign from P(ancilla = 0).
//! * `swap_overlap` runs the controlled-swap test on two separately
//!   prepared registers and reads |<w|k>|^2.
//! * `adjoint_overlap` applies the window preparation followed by the
//!   inverse kernel preparation on a single register; the return
//!   probability of |0...0> is |<w|k>|^2.

use crate::core_sim::{
    adjoint, apply_unitary, controlled_embed, compose, make_register, prob_ancilla_zero,
    sample_counts, StateVector, UnitaryMatrix, MAX_QUBITS,
};
use crate::encoding::{synth_amp_unitary, EncodedPatch};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapMethod {
    Hadamard,
    Swap,
    Adjoint,
}

impl OverlapMethod {
    pub fn label(&self) -> &'static str {
        match self {
            OverlapMethod::Hadamard => "hadamard",
            OverlapMethod::Swap => "swap",
            OverlapMethod::Adjoint => "adjoint",
        }
    }
}

/// Exact readout of the ancilla probability, or a finite number of seeded
/// Bernoulli shots against it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateMode {
    Exact,
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverlapEstimate {
    pub method: OverlapMethod,
    /// Measured or exact probability of the favorable outcome.
    pub p0: f64,
    /// Decoded overlap: signed Re<w|k> for Hadamard, |<w|k>|^2 otherwise.
    pub overlap: f64,
    /// None in exact mode.
    pub shots: Option<u64>,
    /// Standard error propagated to the overlap scale; 0 in exact mode.
    pub std_error: f64,
}

fn same_width(window: &EncodedPatch, kernel: &EncodedPatch) -> Result<usize> {
    if window.n_qubits() != kernel.n_qubits() {
        return Err(Error::Shape(format!(
            "window uses {} qubits but kernel uses {}",
            window.n_qubits(),
            kernel.n_qubits()
        )));
    }
    Ok(window.n_qubits())
}

/// State of the (N+1)-qubit interference circuit: Hadamard on the ancilla,
/// window preparation controlled on ancilla |1>, inverse-direction kernel
/// preparation controlled on ancilla |0>, Hadamard again.
///
/// The final amplitudes are (k_t + w_t)/2 on the ancilla-0 block and
/// (k_t - w_t)/2 on the ancilla-1 block, so P(ancilla = 0) =
/// (1 + <w|k>)/2.
pub fn qaco_state(window: &EncodedPatch, kernel: &EncodedPatch) -> Result<StateVector> {
    let n = same_width(window, kernel)?;
    let prep_w = synth_amp_unitary(window)?;
    let prep_k = synth_amp_unitary(kernel)?;
    let all: Vec<usize> = (0..n + 1).collect();
    let mut st = make_register(n + 1)?;
    st = apply_unitary(&st, &UnitaryMatrix::hadamard(), &[0])?;
    st = apply_unitary(&st, &controlled_embed(&prep_w, true), &all)?;
    st = apply_unitary(&st, &controlled_embed(&prep_k, false), &all)?;
    apply_unitary(&st, &UnitaryMatrix::hadamard(), &[0])
}

fn finish(
    method: OverlapMethod,
    exact_p0: f64,
    mode: EstimateMode,
    decode: impl Fn(f64) -> f64,
    error_scale: f64,
) -> OverlapEstimate {
    match mode {
        EstimateMode::Exact => OverlapEstimate {
            method,
            p0: exact_p0,
            overlap: decode(exact_p0),
            shots: None,
            std_error: 0.0,
        },
        EstimateMode::Shots { shots, seed } => {
            let outcome = sample_counts(exact_p0, shots, seed);
            OverlapEstimate {
                method,
                p0: outcome.estimated_p0,
                overlap: decode(outcome.estimated_p0),
                shots: Some(shots),
                std_error: error_scale * outcome.std_error,
            }
        }
    }
}

/// Signed overlap via the interference circuit: overlap = 2*p0 - 1.
pub fn hadamard_overlap(
    window: &EncodedPatch,
    kernel: &EncodedPatch,
    mode: EstimateMode,
) -> Result<OverlapEstimate> {
    let st = qaco_state(window, kernel)?;
    let p0 = prob_ancilla_zero(&st);
    Ok(finish(OverlapMethod::Hadamard, p0, mode, |p| 2.0 * p - 1.0, 2.0))
}

/// Squared overlap via the controlled-swap test: overlap = 2*p0 - 1.
pub fn swap_overlap(
    window: &EncodedPatch,
    kernel: &EncodedPatch,
    mode: EstimateMode,
) -> Result<OverlapEstimate> {
    let n = same_width(window, kernel)?;
    let total = 2 * n + 1;
    if total > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "swap test needs {total} qubits for {n}-qubit patches, capacity is {MAX_QUBITS}"
        )));
    }
    let prep_w = synth_amp_unitary(window)?;
    let prep_k = synth_amp_unitary(kernel)?;
    let mut st = make_register(total)?;
    if n > 0 {
        let first: Vec<usize> = (1..n + 1).collect();
        let second: Vec<usize> = (n + 1..total).collect();
        st = apply_unitary(&st, &prep_w, &first)?;
        st = apply_unitary(&st, &prep_k, &second)?;
    }
    let h = UnitaryMatrix::hadamard();
    st = apply_unitary(&st, &h, &[0])?;
    let fredkin = controlled_embed(&UnitaryMatrix::swap(), true);
    for i in 0..n {
        st = apply_unitary(&st, &fredkin, &[0, 1 + i, n + 1 + i])?;
    }
    st = apply_unitary(&st, &h, &[0])?;
    let p0 = prob_ancilla_zero(&st);
    Ok(finish(OverlapMethod::Swap, p0, mode, |p| 2.0 * p - 1.0, 2.0))
}

/// Squared overlap via prepare-then-unprepare: overlap = p0 directly.
pub fn adjoint_overlap(
    window: &EncodedPatch,
    kernel: &EncodedPatch,
    mode: EstimateMode,
) -> Result<OverlapEstimate> {
    let n = same_width(window, kernel)?;
    let prep_w = synth_amp_unitary(window)?;
    let unprep_k = adjoint(&synth_amp_unitary(kernel)?);
    let p0 = if n == 0 {
        // Scalar patches: the circuit collapses to a 1x1 operator product.
        compose(&unprep_k, &prep_w)?.entry(0, 0).norm_sqr()
    } else {
        let all: Vec<usize> = (0..n).collect();
        let mut st = make_register(n)?;
        st = apply_unitary(&st, &prep_w, &all)?;
        st = apply_unitary(&st, &unprep_k, &all)?;
        st.prob_of(0)
    };
    Ok(finish(OverlapMethod::Adjoint, p0, mode, |p| p, 1.0))
}

/// Dispatch by method tag.
pub fn estimate_overlap(
    method: OverlapMethod,
    window: &EncodedPatch,
    kernel: &EncodedPatch,
    mode: EstimateMode,
) -> Result<OverlapEstimate> {
    match method {
        OverlapMethod::Hadamard => hadamard_overlap(window, kernel, mode),
        OverlapMethod::Swap => swap_overlap(window, kernel, mode),
        OverlapMethod::Adjoint => adjoint_overlap(window, kernel, mode),
    }
}
