//! State vectors and gate application.

use num_complex::Complex64;

use crate::core_sim::unitary::{UnitaryMatrix, STATE_TOL};
use crate::error::{Error, Result};

/// Hard cap on register width; 2^24 amplitudes is the largest state the
/// dense simulator will allocate.
pub const MAX_QUBITS: usize = 24;

/// Dense state of an `n_qubits` register. Qubit 0 is the most significant
/// bit of the amplitude index.
#[derive(Debug, Clone)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

/// Allocates a register initialized to |0...0>.
pub fn make_register(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Capacity(format!(
            "register width must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    let mut amplitudes = vec![Complex64::ZERO; 1 << n_qubits];
    amplitudes[0] = Complex64::ONE;
    Ok(StateVector {
        n_qubits,
        amplitudes,
    })
}

impl StateVector {
    /// Builds a state from explicit amplitudes; the length must be a power
    /// of two and the norm must be 1 within `STATE_TOL`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len == 0 || !len.is_power_of_two() || len > (1 << MAX_QUBITS) {
            return Err(Error::Shape(format!(
                "amplitude count must be a power of two within capacity, got {len}"
            )));
        }
        let state = StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::Invariant(format!(
                "state norm is {norm}, expected 1 within {STATE_TOL:e}"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Probability of observing the computational basis state `index`.
    pub fn prob_of(&self, index: usize) -> f64 {
        assert!(index < self.amplitudes.len(), "basis index out of range");
        self.amplitudes[index].norm_sqr()
    }

    /// Probability that measuring `qubit` yields 0.
    pub fn prob_zero(&self, qubit: usize) -> f64 {
        assert!(qubit < self.n_qubits, "qubit {qubit} out of range");
        let shift = self.n_qubits - 1 - qubit;
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> shift) & 1 == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }
}

/// Probability that measuring qubit 0 (the ancilla wire) yields 0.
pub fn prob_ancilla_zero(state: &StateVector) -> f64 {
    state.prob_zero(0)
}

/// Applies `u` to the listed target qubits and returns the new state.
///
/// `targets[0]` is the most significant qubit of `u`'s local index, matching
/// the global convention. Targets must be distinct, in range, and as many as
/// `u` has qubits.
pub fn apply_unitary(
    state: &StateVector,
    u: &UnitaryMatrix,
    targets: &[usize],
) -> Result<StateVector> {
    let n = state.n_qubits;
    let k = targets.len();
    if u.dim() != 1usize << k {
        return Err(Error::Shape(format!(
            "{}x{} matrix does not act on {k} target qubits",
            u.dim(),
            u.dim()
        )));
    }
    let mut target_mask = 0usize;
    for &t in targets {
        if t >= n {
            return Err(Error::Shape(format!(
                "target qubit {t} out of range for a {n}-qubit register"
            )));
        }
        let bit = 1usize << (n - 1 - t);
        if target_mask & bit != 0 {
            return Err(Error::Shape(format!("target qubit {t} listed twice")));
        }
        target_mask |= bit;
    }

    // spread[j] places the k-bit local index j onto the global target bits;
    // bit (k-1-idx) of j lands on targets[idx].
    let local_dim = 1usize << k;
    let mut spread = vec![0usize; local_dim];
    for (j, slot) in spread.iter_mut().enumerate() {
        for (idx, &t) in targets.iter().enumerate() {
            if (j >> (k - 1 - idx)) & 1 == 1 {
                *slot |= 1usize << (n - 1 - t);
            }
        }
    }

    let mut out = vec![Complex64::ZERO; state.amplitudes.len()];
    let mut gathered = vec![Complex64::ZERO; local_dim];
    for base in 0..state.amplitudes.len() {
        if base & target_mask != 0 {
            continue;
        }
        for (j, g) in gathered.iter_mut().enumerate() {
            *g = state.amplitudes[base | spread[j]];
        }
        for i in 0..local_dim {
            let mut acc = Complex64::ZERO;
            for (j, g) in gathered.iter().enumerate() {
                acc += u.entry(i, j) * g;
            }
            out[base | spread[i]] = acc;
        }
    }
    Ok(StateVector {
        n_qubits: n,
        amplitudes: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core_sim::unitary::{compose, controlled_embed, ALGEBRA_TOL};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> StateVector {
        let mut amps: Vec<Complex64> = (0..1usize << n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        StateVector::from_amplitudes(amps).unwrap()
    }

    fn random_unitary(rng: &mut ChaCha8Rng, qubits: usize) -> UnitaryMatrix {
        // Product of random single-qubit rotations and controlled flips,
        // enough structure to exercise arbitrary target sets.
        let mut u = UnitaryMatrix::identity(1 << qubits);
        for _ in 0..4 {
            let angle = rng.random::<f64>() * std::f64::consts::PI;
            let (s, c) = angle.sin_cos();
            let rot = UnitaryMatrix::new(
                2,
                vec![
                    Complex64::new(c, 0.0),
                    Complex64::new(-s, 0.0),
                    Complex64::new(s, 0.0),
                    Complex64::new(c, 0.0),
                ],
            )
            .unwrap();
            let mut block = if qubits == 1 {
                rot
            } else {
                let mut b = rot;
                for _ in 1..qubits {
                    b = b.kron(&UnitaryMatrix::hadamard());
                }
                b
            };
            if rng.random::<f64>() < 0.5 {
                block = crate::core_sim::adjoint(&block);
            }
            u = compose(&block, &u).unwrap();
        }
        u
    }

    #[test]
    fn make_register_starts_in_all_zeros() {
        let st = make_register(3).unwrap();
        assert_eq!(st.amplitudes()[0], Complex64::ONE);
        assert_eq!(st.amplitudes()[1..].iter().map(|a| a.norm_sqr()).sum::<f64>(), 0.0);
    }

    #[test]
    fn make_register_rejects_out_of_capacity() {
        assert!(matches!(make_register(0), Err(Error::Capacity(_))));
        assert!(matches!(make_register(MAX_QUBITS + 1), Err(Error::Capacity(_))));
    }

    #[test]
    fn from_amplitudes_rejects_non_unit_norm() {
        let res = StateVector::from_amplitudes(vec![Complex64::ONE, Complex64::ONE]);
        assert!(matches!(res, Err(Error::Invariant(_))));
    }

    #[test]
    fn qubit_zero_is_most_significant() {
        // X on qubit 0 of a 2-qubit register: |00> -> |10> = index 2.
        let st = make_register(2).unwrap();
        let st = apply_unitary(&st, &UnitaryMatrix::pauli_x(), &[0]).unwrap();
        assert!((st.prob_of(2) - 1.0).abs() < ALGEBRA_TOL);
        // X on qubit 1: |00> -> |01> = index 1.
        let st = make_register(2).unwrap();
        let st = apply_unitary(&st, &UnitaryMatrix::pauli_x(), &[1]).unwrap();
        assert!((st.prob_of(1) - 1.0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn target_order_controls_local_significance() {
        // CX with control listed first vs last: |10> flips the target only
        // when the control is the local most significant qubit.
        let cx = controlled_embed(&UnitaryMatrix::pauli_x(), true);
        let st = make_register(2).unwrap();
        let st = apply_unitary(&st, &UnitaryMatrix::pauli_x(), &[0]).unwrap();
        let forward = apply_unitary(&st, &cx, &[0, 1]).unwrap();
        assert!((forward.prob_of(0b11) - 1.0).abs() < ALGEBRA_TOL);
        let reversed = apply_unitary(&st, &cx, &[1, 0]).unwrap();
        // Control is qubit 1, currently |0>, so nothing happens.
        assert!((reversed.prob_of(0b10) - 1.0).abs() < ALGEBRA_TOL);
    }

    #[test]
    fn apply_rejects_bad_targets() {
        let st = make_register(2).unwrap();
        let x = UnitaryMatrix::pauli_x();
        assert!(apply_unitary(&st, &x, &[2]).is_err());
        assert!(apply_unitary(&st, &x, &[0, 1]).is_err());
        let cx = controlled_embed(&x, true);
        assert!(apply_unitary(&st, &cx, &[0, 0]).is_err());
    }

    #[test]
    fn application_preserves_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for trial in 0..200 {
            let n = 1 + (trial % 5);
            let st = random_state(&mut rng, n);
            let k = 1 + rng.random::<u64>() as usize % n.min(3);
            let mut targets: Vec<usize> = (0..n).collect();
            for i in (1..targets.len()).rev() {
                let j = rng.random::<u64>() as usize % (i + 1);
                targets.swap(i, j);
            }
            targets.truncate(k);
            let u = random_unitary(&mut rng, k);
            let out = apply_unitary(&st, &u, &targets).unwrap();
            assert!(
                (out.norm() - 1.0).abs() < STATE_TOL,
                "norm drifted to {} on trial {trial}",
                out.norm()
            );
        }
    }

    #[test]
    fn matches_full_matrix_application_on_permuted_targets() {
        // Applying a 2-qubit gate to targets [1, 0] of a 2-qubit register
        // must equal conjugating the matrix with the wire swap.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let st = random_state(&mut rng, 2);
        let u = random_unitary(&mut rng, 2);
        let direct = apply_unitary(&st, &u, &[1, 0]).unwrap();
        let swap = UnitaryMatrix::swap();
        let conjugated = compose(&swap, &compose(&u, &swap).unwrap()).unwrap();
        let expected = apply_unitary(&st, &conjugated, &[0, 1]).unwrap();
        let diff = direct
            .amplitudes()
            .iter()
            .zip(expected.amplitudes())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        assert!(diff < STATE_TOL, "permuted application deviates by {diff}");
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let st = random_state(&mut rng, 4);
        for q in 0..4 {
            let p0 = st.prob_zero(q);
            assert!((0.0..=1.0 + 1e-15).contains(&p0));
        }
        let total: f64 = (0..16).map(|i| st.prob_of(i)).sum();
        assert!((total - 1.0).abs() < STATE_TOL);
    }
}
