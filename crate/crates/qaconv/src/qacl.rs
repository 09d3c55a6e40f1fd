//! Phase-estimation readout of the interference circuit and the full
//! convolutional layer built from it.
//!
//! The ancilla-0 probability p0 of the interference state relates to the
//! encoded overlap through sin(theta)^2 = p0 with theta in [0, pi/2], so
//! overlap = 2*p0 - 1 = -cos(2*theta). The iterate built here rotates the
//! plane spanned by the state's two ancilla blocks by 2*theta, giving it
//! eigenvalues exp(+/- 2i*theta); phase estimation on s qubits reads the
//! rotation angle to one part in 2^s of a turn and decodes the overlap
//! without measuring the ancilla directly.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convolution::{output_shape, ImageGrid};
use crate::core_sim::{
    adjoint, apply_unitary, compose, controlled_embed, inverse_qft, make_register,
    UnitaryMatrix, MAX_QUBITS, STATE_TOL,
};
use crate::encoding::{synth_state_prep, EncodedPatch, KernelMatrix};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::overlap::{qaco_state, EstimateMode, OverlapMethod};

/// Largest phase register accepted by the readout.
pub const MAX_PHASE_QUBITS: usize = 10;

/// The unitary whose phases encode one window/kernel overlap, together with
/// the state preparation it was derived from and the analytically known
/// rotation angle for cross-checking.
#[derive(Debug, Clone)]
pub struct IterateOperator {
    /// Rotation by 2*theta on the interference plane.
    pub u: UnitaryMatrix,
    /// Maps |0...0> to the interference state.
    pub state_prep: UnitaryMatrix,
    /// theta = asin(sqrt(p0)), in [0, pi/2].
    pub theta_truth: f64,
}

/// Unitary preparing the interference state of a window/kernel pair from
/// |0...0>.
pub fn build_state_prep(window: &EncodedPatch, kernel: &EncodedPatch) -> Result<UnitaryMatrix> {
    let st = qaco_state(window, kernel)?;
    let mut reals = Vec::with_capacity(st.amplitudes().len());
    for a in st.amplitudes() {
        if a.im.abs() > STATE_TOL {
            return Err(Error::Invariant(format!(
                "interference state of real encodings has imaginary part {}",
                a.im
            )));
        }
        reals.push(a.re);
    }
    synth_state_prep(&reals)
}

/// Reflection I - 2|0...0><0...0|, i.e. diag(-1, 1, ..., 1).
pub fn build_reflection(n_qubits: usize) -> UnitaryMatrix {
    let dim = 1usize << n_qubits;
    let mut entries = vec![Complex64::ZERO; dim * dim];
    entries[0] = -Complex64::ONE;
    for i in 1..dim {
        entries[i * dim + i] = Complex64::ONE;
    }
    UnitaryMatrix::from_trusted(dim, entries)
}

/// Builds the phase-estimation iterate for one window/kernel pair:
/// U = P * R * P^dagger * (Z on the ancilla), where P is the state
/// preparation and R the reflection about |0...0>.
pub fn build_iterate(window: &EncodedPatch, kernel: &EncodedPatch) -> Result<IterateOperator> {
    let state_prep = build_state_prep(window, kernel)?;
    let n_total = state_prep.dim().trailing_zeros() as usize;
    let block = state_prep.dim() / 2;
    let z_ancilla = UnitaryMatrix::pauli_z().kron(&UnitaryMatrix::identity(block));
    let reflect = build_reflection(n_total);
    let u = compose(
        &state_prep,
        &compose(&reflect, &compose(&adjoint(&state_prep), &z_ancilla)?)?,
    )?;
    // p0 read off the prepared column keeps the truth value tied to the
    // exact circuit rather than to a separate computation.
    let p0: f64 = (0..block).map(|i| state_prep.entry(i, 0).norm_sqr()).sum();
    Ok(IterateOperator {
        u,
        state_prep,
        theta_truth: p0.min(1.0).sqrt().asin(),
    })
}

/// Phase-register readout for one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReadout {
    /// Phase register width.
    pub s: usize,
    /// Exact bin probabilities, or observed frequencies in shot mode.
    pub distribution: Vec<f64>,
    /// Most likely (or most frequent) bin; ties resolve to the smaller index.
    pub peak_bin: usize,
    /// pi * min(peak, 2^s - peak) / 2^s, in [0, pi/2].
    pub decoded_theta: f64,
    /// -cos(2 * decoded_theta).
    pub decoded_overlap: f64,
}

fn argmax_smallest(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

fn decode_bin(s: usize, bin: usize) -> (f64, f64) {
    let half_turns = 1usize << s;
    let folded = bin.min(half_turns - bin);
    let theta = PI * folded as f64 / half_turns as f64;
    (theta, -(2.0 * theta).cos())
}

/// Runs phase estimation with `s` phase qubits over the iterate's data
/// register. Phase qubits sit above the data register and qubit q controls
/// U^(2^(s-1-q)), so after the inverse Fourier transform the phase register
/// holds the bin index directly.
pub fn qpe_estimate(iterate: &IterateOperator, s: usize, mode: EstimateMode) -> Result<PhaseReadout> {
    if s == 0 || s > MAX_PHASE_QUBITS {
        return Err(Error::Capacity(format!(
            "phase register width must be in 1..={MAX_PHASE_QUBITS}, got {s}"
        )));
    }
    let data_qubits = iterate.u.dim().trailing_zeros() as usize;
    let total = s + data_qubits;
    if total > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "phase estimation needs s + data = {s} + {data_qubits} = {total} qubits, capacity is {MAX_QUBITS}"
        )));
    }

    let mut st = make_register(total)?;
    let data_targets: Vec<usize> = (s..total).collect();
    st = apply_unitary(&st, &iterate.state_prep, &data_targets)?;
    let h = UnitaryMatrix::hadamard();
    for q in 0..s {
        st = apply_unitary(&st, &h, &[q])?;
    }
    // Walk controls from the least significant phase qubit upward, squaring
    // the iterate as the exponent doubles.
    let mut power = iterate.u.clone();
    for q in (0..s).rev() {
        let controlled = controlled_embed(&power, true);
        let mut targets = vec![q];
        targets.extend_from_slice(&data_targets);
        st = apply_unitary(&st, &controlled, &targets)?;
        if q > 0 {
            power = compose(&power, &power)?;
        }
    }
    let phase_targets: Vec<usize> = (0..s).collect();
    st = apply_unitary(&st, &inverse_qft(s)?, &phase_targets)?;

    let bins = 1usize << s;
    let block = 1usize << data_qubits;
    let mut exact = vec![0.0f64; bins];
    for (i, amp) in st.amplitudes().iter().enumerate() {
        exact[i / block] += amp.norm_sqr();
    }
    debug_assert!((exact.iter().sum::<f64>() - 1.0).abs() < STATE_TOL);

    let (distribution, peak_bin) = match mode {
        EstimateMode::Exact => {
            let peak = argmax_smallest(&exact);
            (exact, peak)
        }
        EstimateMode::Shots { shots, seed } => {
            let mut cumulative = Vec::with_capacity(bins);
            let mut acc = 0.0;
            for p in &exact {
                acc += p;
                cumulative.push(acc);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut counts = vec![0u64; bins];
            for _ in 0..shots.max(1) {
                let r: f64 = rng.random::<f64>() * acc;
                let bin = cumulative.partition_point(|&c| c <= r).min(bins - 1);
                counts[bin] += 1;
            }
            let total_shots = shots.max(1) as f64;
            let freqs: Vec<f64> = counts.iter().map(|&c| c as f64 / total_shots).collect();
            let peak = argmax_smallest(&freqs);
            (freqs, peak)
        }
    };
    let (decoded_theta, decoded_overlap) = decode_bin(s, peak_bin);
    Ok(PhaseReadout {
        s,
        distribution,
        peak_bin,
        decoded_theta,
        decoded_overlap,
    })
}

/// Worst-case decode error of the folded argmax readout, one bin width on
/// the 2*theta scale.
pub fn decode_error_bound(s: usize) -> f64 {
    PI / (1usize << (s - 1)) as f64
}

/// How a feature map was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapMethod {
    /// Direct ancilla readout with one of the overlap circuits.
    Overlap(OverlapMethod),
    /// Phase-estimation readout with an s-qubit phase register.
    Qpe { s: usize },
}

impl MapMethod {
    pub fn label(&self) -> &'static str {
        match self {
            MapMethod::Overlap(m) => m.label(),
            MapMethod::Qpe { .. } => "qpe",
        }
    }
}

/// Feature map over normalized encodings, plus the norms needed to rescale
/// each entry back to classical units.
#[derive(Debug, Clone)]
pub struct FeatureMap {
    /// Overlap value per output position.
    pub grid: Grid,
    pub stride: usize,
    pub padding: usize,
    pub method: MapMethod,
    /// Euclidean norm of each window (0 for all-zero windows).
    pub window_norms: Grid,
    /// Euclidean norm of the kernel.
    pub kernel_norm: f64,
}

/// Deterministic per-window sampling seed: a SplitMix64-style mix of the
/// global seed with the output coordinates, so window evaluations can run
/// in any order or in parallel without sharing generator state.
pub fn derive_window_seed(global_seed: u64, row: usize, col: usize) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(global_seed).wrapping_add(((row as u64) << 32) | col as u64 & 0xFFFF_FFFF))
}

fn window_mode(mode: EstimateMode, row: usize, col: usize) -> EstimateMode {
    match mode {
        EstimateMode::Exact => EstimateMode::Exact,
        EstimateMode::Shots { shots, seed } => EstimateMode::Shots {
            shots,
            seed: derive_window_seed(seed, row, col),
        },
    }
}

/// Full convolutional layer: slides the kernel over the image and reads
/// every window overlap through phase estimation. All-zero windows carry no
/// quantum state and enter the map as overlap 0 with window norm 0.
pub fn qacl_layer(
    image: &ImageGrid,
    kernel: &KernelMatrix,
    stride: usize,
    padding: usize,
    s: usize,
    mode: EstimateMode,
) -> Result<FeatureMap> {
    let kernel_patch = kernel.encode()?;
    let windows = crate::convolution::extract_windows(
        image,
        kernel.rows(),
        kernel.cols(),
        stride,
        padding,
    )?;
    let (out_rows, out_cols) = output_shape(
        image.rows(),
        image.cols(),
        kernel.rows(),
        kernel.cols(),
        stride,
        padding,
    )?;
    let mut grid = Grid::zeros(out_rows, out_cols)?;
    let mut norms = Grid::zeros(out_rows, out_cols)?;
    for (idx, window) in windows.iter().enumerate() {
        let (r, c) = (idx / out_cols, idx % out_cols);
        match window.encode() {
            Err(Error::DegeneratePatch(_)) => {}
            Err(other) => return Err(other),
            Ok(patch) => {
                let iterate = build_iterate(&patch, &kernel_patch)?;
                let readout = qpe_estimate(&iterate, s, window_mode(mode, r, c))?;
                grid.set(r, c, readout.decoded_overlap);
                norms.set(r, c, patch.norm_factor());
            }
        }
    }
    Ok(FeatureMap {
        grid,
        stride,
        padding,
        method: MapMethod::Qpe { s },
        window_norms: norms,
        kernel_norm: kernel_patch.norm_factor(),
    })
}
