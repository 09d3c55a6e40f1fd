//! Dense unitary matrices and the fixed constructions built from them.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for algebraic identities checked directly on constructed
/// matrices (unitarity, composition closure).
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Tolerance for properties propagated through a chain of applications
/// (state norms, probabilities).
pub const STATE_TOL: f64 = 1e-10;

/// Square complex matrix, row-major, checked to be unitary on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    entries: Vec<Complex64>,
}

impl UnitaryMatrix {
    /// Validates that `dim` is a power of two, the entry count matches and
    /// the matrix is unitary within `ALGEBRA_TOL`.
    pub fn new(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::Shape(format!(
                "matrix dimension must be a power of two, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::Shape(format!(
                "{dim}x{dim} matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let u = UnitaryMatrix { dim, entries };
        if !u.is_unitary_within(ALGEBRA_TOL) {
            return Err(Error::Invariant(format!(
                "{dim}x{dim} matrix is not unitary within {ALGEBRA_TOL:e}"
            )));
        }
        Ok(u)
    }

    /// Constructor for matrices that are unitary by construction; skips the
    /// O(dim^3) check but keeps it on in debug builds.
    pub(crate) fn from_trusted(dim: usize, entries: Vec<Complex64>) -> Self {
        debug_assert!(dim.is_power_of_two() && entries.len() == dim * dim);
        let u = UnitaryMatrix { dim, entries };
        // The O(dim^3) re-check is cheap enough to keep on in debug builds
        // for small blocks only.
        debug_assert!(
            u.dim > 64 || u.is_unitary_within(ALGEBRA_TOL),
            "trusted construction produced a non-unitary matrix"
        );
        u
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = Complex64::ONE;
        }
        UnitaryMatrix::from_trusted(dim, entries)
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        UnitaryMatrix::from_trusted(2, vec![h, h, h, -h])
    }

    pub fn pauli_x() -> Self {
        UnitaryMatrix::from_trusted(
            2,
            vec![Complex64::ZERO, Complex64::ONE, Complex64::ONE, Complex64::ZERO],
        )
    }

    pub fn pauli_z() -> Self {
        UnitaryMatrix::from_trusted(
            2,
            vec![Complex64::ONE, Complex64::ZERO, Complex64::ZERO, -Complex64::ONE],
        )
    }

    /// Two-qubit gate exchanging its wires.
    pub fn swap() -> Self {
        let mut entries = vec![Complex64::ZERO; 16];
        for (row, col) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
            entries[row * 4 + col] = Complex64::ONE;
        }
        UnitaryMatrix::from_trusted(4, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.dim && col < self.dim, "entry index out of range");
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        assert!(col < self.dim, "column index out of range");
        (0..self.dim).map(|r| self.entries[r * self.dim + col]).collect()
    }

    /// Checks max |(U^dagger U - I)_{jk}| <= tol.
    pub fn is_unitary_within(&self, tol: f64) -> bool {
        let d = self.dim;
        for j in 0..d {
            for k in 0..d {
                let mut sum = Complex64::ZERO;
                for r in 0..d {
                    sum += self.entries[r * d + j].conj() * self.entries[r * d + k];
                }
                let expected = if j == k { Complex64::ONE } else { Complex64::ZERO };
                if (sum - expected).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Kronecker product `self (x) other`; `self` acts on the more
    /// significant qubits of the result.
    pub fn kron(&self, other: &UnitaryMatrix) -> UnitaryMatrix {
        let (a, b) = (self.dim, other.dim);
        let dim = a * b;
        let mut entries = vec![Complex64::ZERO; dim * dim];
        for i in 0..a {
            for j in 0..a {
                let factor = self.entries[i * a + j];
                if factor == Complex64::ZERO {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        entries[(i * b + k) * dim + (j * b + l)] =
                            factor * other.entries[k * b + l];
                    }
                }
            }
        }
        UnitaryMatrix::from_trusted(dim, entries)
    }
}

/// Matrix product `u_last * u_first`: `u_first` is the gate applied first in
/// circuit order.
pub fn compose(u_last: &UnitaryMatrix, u_first: &UnitaryMatrix) -> Result<UnitaryMatrix> {
    if u_last.dim != u_first.dim {
        return Err(Error::Shape(format!(
            "cannot compose {}x{} with {}x{}",
            u_last.dim, u_last.dim, u_first.dim, u_first.dim
        )));
    }
    let d = u_last.dim;
    let mut entries = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for k in 0..d {
            let factor = u_last.entries[i * d + k];
            if factor == Complex64::ZERO {
                continue;
            }
            for j in 0..d {
                entries[i * d + j] += factor * u_first.entries[k * d + j];
            }
        }
    }
    Ok(UnitaryMatrix::from_trusted(d, entries))
}

/// Conjugate transpose.
pub fn adjoint(u: &UnitaryMatrix) -> UnitaryMatrix {
    let d = u.dim;
    let mut entries = vec![Complex64::ZERO; d * d];
    for i in 0..d {
        for j in 0..d {
            entries[j * d + i] = u.entries[i * d + j].conj();
        }
    }
    UnitaryMatrix::from_trusted(d, entries)
}

/// Embeds `u` as a controlled operation on one extra qubit. The control is
/// the most significant qubit of the result; `control_on` selects whether
/// `u` acts on the control's |1> branch (true) or its |0> branch (false),
/// with identity on the other branch.
pub fn controlled_embed(u: &UnitaryMatrix, control_on: bool) -> UnitaryMatrix {
    let d = u.dim;
    let dim = 2 * d;
    let mut entries = vec![Complex64::ZERO; dim * dim];
    let (active, idle) = if control_on { (d, 0) } else { (0, d) };
    for i in 0..d {
        entries[(idle + i) * dim + (idle + i)] = Complex64::ONE;
        for j in 0..d {
            entries[(active + i) * dim + (active + j)] = u.entries[i * d + j];
        }
    }
    UnitaryMatrix::from_trusted(dim, entries)
}

/// Discrete Fourier transform on `s` qubits:
/// entry(j, k) = exp(+2*pi*i*j*k / 2^s) / sqrt(2^s).
pub fn qft(s: usize) -> Result<UnitaryMatrix> {
    fourier(s, 1.0)
}

/// Inverse Fourier transform on `s` qubits:
/// entry(j, k) = exp(-2*pi*i*j*k / 2^s) / sqrt(2^s).
pub fn inverse_qft(s: usize) -> Result<UnitaryMatrix> {
    fourier(s, -1.0)
}

fn fourier(s: usize, sign: f64) -> Result<UnitaryMatrix> {
    if s == 0 || s > 16 {
        return Err(Error::Capacity(format!(
            "Fourier register size must be in 1..=16, got {s}"
        )));
    }
    let d = 1usize << s;
    let scale = 1.0 / (d as f64).sqrt();
    let mut entries = vec![Complex64::ZERO; d * d];
    for j in 0..d {
        for k in 0..d {
            // Reduce j*k mod 2^s before converting to an angle to keep the
            // argument small.
            let t = (j * k) % d;
            let angle = sign * 2.0 * PI * (t as f64) / (d as f64);
            entries[j * d + k] = Complex64::from_polar(scale, angle);
        }
    }
    Ok(UnitaryMatrix::from_trusted(d, entries))
}
