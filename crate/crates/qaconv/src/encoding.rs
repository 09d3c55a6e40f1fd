//! Amplitude encoding of kernels and image windows.
//!
//! A real l x m patch is flattened row-major, divided by its Euclidean norm
//! and zero-padded to the next power of two; the resulting unit vector is
//! the amplitude vector of an N-qubit state with N = ceil(log2(l*m)). The
//! norm is kept alongside the state so overlaps can later be rescaled back
//! to classical units.

use num_complex::Complex64;

use crate::core_sim::{UnitaryMatrix, ALGEBRA_TOL};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Convolution kernel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    grid: Grid,
}

impl KernelMatrix {
    pub fn new(grid: Grid) -> Self {
        KernelMatrix { grid }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Ok(KernelMatrix::new(Grid::from_rows(rows)?))
    }

    pub fn rows(&self) -> usize {
        self.grid.rows()
    }

    pub fn cols(&self) -> usize {
        self.grid.cols()
    }

    pub fn weights(&self) -> &Grid {
        &self.grid
    }

    pub fn encode(&self) -> Result<EncodedPatch> {
        encode(&self.grid)
    }
}

/// One kernel-sized view into a (possibly zero-padded) image. `anchor` is
/// the window's top-left position in padded-image coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowMatrix {
    anchor: (usize, usize),
    grid: Grid,
}

impl WindowMatrix {
    pub fn new(anchor: (usize, usize), grid: Grid) -> Self {
        WindowMatrix { anchor, grid }
    }

    pub fn anchor(&self) -> (usize, usize) {
        self.anchor
    }

    pub fn entries(&self) -> &Grid {
        &self.grid
    }

    pub fn encode(&self) -> Result<EncodedPatch> {
        encode(&self.grid)
    }
}

/// A patch after normalization and padding: a real unit vector of length
/// 2^n_qubits plus the norm that was divided out.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedPatch {
    n_qubits: usize,
    amplitudes: Vec<f64>,
    norm_factor: f64,
}

impl EncodedPatch {
    /// Wraps an already-normalized amplitude vector; the length must be a
    /// power of two and the norm 1 within 1e-12.
    pub fn from_normalized(amplitudes: Vec<f64>, norm_factor: f64) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Shape(format!(
                "amplitude count must be a power of two, got {len}"
            )));
        }
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::Invariant(format!(
                "encoded patch norm is {norm}, expected 1 within {ALGEBRA_TOL:e}"
            )));
        }
        Ok(EncodedPatch {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
            norm_factor,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Euclidean norm of the original patch, the factor that restores
    /// classical units.
    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }
}

fn l2_norm(seq: &[f64]) -> f64 {
    seq.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Row-major flattening: entry (r, c) of an l x m grid lands at index
/// r*m + c.
pub fn flatten(grid: &Grid) -> Vec<f64> {
    grid.as_slice().to_vec()
}

/// Divides by the Euclidean norm; returns the unit vector and the norm.
pub fn quantum_normalize(seq: &[f64]) -> Result<(Vec<f64>, f64)> {
    let norm = l2_norm(seq);
    if norm == 0.0 {
        return Err(Error::DegeneratePatch(
            "all-zero patch has no amplitude encoding".into(),
        ));
    }
    Ok((seq.iter().map(|v| v / norm).collect(), norm))
}

/// Zero-pads to length 2^n_qubits.
pub fn pad_to_register(seq: &[f64], n_qubits: usize) -> Result<Vec<f64>> {
    let dim = 1usize
        .checked_shl(n_qubits as u32)
        .ok_or_else(|| Error::Capacity(format!("2^{n_qubits} amplitudes overflow")))?;
    if seq.len() > dim {
        return Err(Error::Shape(format!(
            "{} amplitudes do not fit a {n_qubits}-qubit register",
            seq.len()
        )));
    }
    let mut padded = seq.to_vec();
    padded.resize(dim, 0.0);
    Ok(padded)
}

/// Smallest register that holds `len` amplitudes.
pub fn required_qubits(len: usize) -> usize {
    assert!(len >= 1, "cannot size a register for zero amplitudes");
    len.next_power_of_two().trailing_zeros() as usize
}

/// Full encoding pipeline: flatten, normalize, pad.
pub fn encode(grid: &Grid) -> Result<EncodedPatch> {
    let flat = flatten(grid);
    let (unit, norm_factor) = quantum_normalize(&flat)?;
    let n_qubits = required_qubits(unit.len());
    let amplitudes = pad_to_register(&unit, n_qubits)?;
    EncodedPatch::from_normalized(amplitudes, norm_factor)
}

/// Real orthogonal matrix whose first column is exactly the given unit
/// vector, built from a single Householder reflection.
///
/// With s = sign of the leading entry and v = column + s*e0, the matrix
/// s*(2vv^T/|v|^2 - I) is symmetric, orthogonal, and maps |0> to the
/// column; |v|^2 = 2(1 + |column[0]|) >= 2, so the construction never
/// divides by a small number.
pub fn synth_state_prep(column: &[f64]) -> Result<UnitaryMatrix> {
    let dim = column.len();
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Shape(format!(
            "state length must be a power of two, got {dim}"
        )));
    }
    let norm = l2_norm(column);
    if (norm - 1.0).abs() > ALGEBRA_TOL {
        return Err(Error::Invariant(format!(
            "state-prep target has norm {norm}, expected 1 within {ALGEBRA_TOL:e}"
        )));
    }
    let sign = if column[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut v = column.to_vec();
    v[0] += sign;
    let denom: f64 = v.iter().map(|x| x * x).sum();
    let mut entries = vec![Complex64::ZERO; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            let householder = 2.0 * v[i] * v[j] / denom - if i == j { 1.0 } else { 0.0 };
            entries[i * dim + j] = Complex64::new(sign * householder, 0.0);
        }
    }
    Ok(UnitaryMatrix::from_trusted(dim, entries))
}

/// State-preparation unitary for an encoded patch: maps |0...0> to the
/// patch's amplitude vector.
pub fn synth_amp_unitary(patch: &EncodedPatch) -> Result<UnitaryMatrix> {
    synth_state_prep(patch.amplitudes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn flatten_is_row_major() {
        let g = Grid::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(flatten(&g), vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn normalize_divides_by_euclidean_norm() {
        // 1 + 1 + 25 + 9 = 36, so the norm is exactly 6.
        let (unit, norm) = quantum_normalize(&[1.0, 1.0, -5.0, 3.0]).unwrap();
        assert_eq!(norm, 6.0);
        let expected = [1.0 / 6.0, 1.0 / 6.0, -5.0 / 6.0, 3.0 / 6.0];
        for (u, e) in unit.iter().zip(expected) {
            assert!((u - e).abs() < 1e-15);
        }
    }

    #[test]
    fn normalize_rejects_zero_patch() {
        assert!(matches!(
            quantum_normalize(&[0.0, 0.0, 0.0]),
            Err(Error::DegeneratePatch(_))
        ));
    }

    #[test]
    fn three_by_three_needs_four_qubits() {
        let g = Grid::new(3, 3, (1..=9).map(f64::from).collect()).unwrap();
        let patch = encode(&g).unwrap();
        assert_eq!(patch.n_qubits(), 4);
        assert_eq!(patch.dim(), 16);
        for &tail in &patch.amplitudes()[9..] {
            assert_eq!(tail, 0.0, "padding must be exactly zero");
        }
    }

    #[test]
    fn register_sizing_is_minimal() {
        for len in 1..=70usize {
            let n = required_qubits(len);
            assert!(1 << n >= len);
            assert!(len == 1 || 1 << (n - 1) < len, "2^{n} is not minimal for {len}");
        }
    }

    #[test]
    fn single_positive_pixel_encodes_to_one() {
        let g = Grid::new(1, 1, vec![3.5]).unwrap();
        let patch = encode(&g).unwrap();
        assert_eq!(patch.n_qubits(), 0);
        assert_eq!(patch.amplitudes(), &[1.0]);
        assert_eq!(patch.norm_factor(), 3.5);
    }

    #[test]
    fn pad_rejects_overfull_register() {
        assert!(pad_to_register(&[1.0, 0.0, 0.0], 1).is_err());
    }

    #[test]
    fn synth_first_column_reconstructs_the_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for dim in [1usize, 2, 4, 8, 16] {
            for trial in 0..40 {
                let mut x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
                let norm = l2_norm(&x);
                if norm < 1e-6 {
                    continue;
                }
                for v in &mut x {
                    *v /= norm;
                }
                let u = synth_state_prep(&x).unwrap();
                assert!(u.is_unitary_within(ALGEBRA_TOL));
                for (i, xi) in x.iter().enumerate() {
                    let got = u.entry(i, 0);
                    assert!(
                        (got.re - xi).abs() < 1e-12 && got.im == 0.0,
                        "dim {dim} trial {trial}: column entry {i} is {got} vs {xi}"
                    );
                }
            }
        }
    }

    #[test]
    fn synth_handles_negative_leading_entry() {
        let x = [-0.6, 0.8];
        let u = synth_state_prep(&x).unwrap();
        assert!((u.entry(0, 0).re + 0.6).abs() < 1e-15);
        assert!((u.entry(1, 0).re - 0.8).abs() < 1e-15);
    }

    #[test]
    fn synth_rejects_non_unit_input() {
        assert!(matches!(
            synth_state_prep(&[0.5, 0.5]),
            Err(Error::Invariant(_))
        ));
        assert!(synth_state_prep(&[1.0, 0.0, 0.0]).is_err());
    }

    fn arb_grid() -> impl Strategy<Value = Grid> {
        (1usize..=4, 1usize..=4)
            .prop_flat_map(|(r, c)| {
                prop::collection::vec(-10.0f64..10.0, r * c)
                    .prop_map(move |data| Grid::new(r, c, data).unwrap())
            })
            .prop_filter("needs a nonzero entry", |g| g.max_abs() > 1e-9)
    }

    proptest! {
        #[test]
        fn scaling_leaves_amplitudes_fixed(g in arb_grid(), factor in 0.1f64..100.0) {
            let base = encode(&g).unwrap();
            let scaled = encode(&g.scaled(factor)).unwrap();
            prop_assert_eq!(base.n_qubits(), scaled.n_qubits());
            for (a, b) in base.amplitudes().iter().zip(scaled.amplitudes()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert!(
                (scaled.norm_factor() - factor * base.norm_factor()).abs()
                    <= 1e-12 * scaled.norm_factor().abs()
            );
        }

        #[test]
        fn unit_dot_times_norms_recovers_frobenius(a in arb_grid(), w_data in prop::collection::vec(-10.0f64..10.0, 16)) {
            // Reshape w_data to match a; the independent reference is the
            // plain elementwise product sum.
            let w = Grid::new(a.rows(), a.cols(), w_data[..a.rows() * a.cols()].to_vec()).unwrap();
            prop_assume!(w.max_abs() > 1e-9);
            let pa = encode(&a).unwrap();
            let pw = encode(&w).unwrap();
            let unit_dot: f64 = pa
                .amplitudes()
                .iter()
                .zip(pw.amplitudes())
                .map(|(x, y)| x * y)
                .sum();
            let frobenius: f64 = a
                .as_slice()
                .iter()
                .zip(w.as_slice())
                .map(|(x, y)| x * y)
                .sum();
            let recovered = unit_dot * pa.norm_factor() * pw.norm_factor();
            prop_assert!(
                (recovered - frobenius).abs() < 1e-10,
                "recovered {} vs frobenius {}", recovered, frobenius
            );
        }
    }
}
