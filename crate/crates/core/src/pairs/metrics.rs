//! Internal two-qubit state of the post-selected pair and its Bell figures.
//!
//! Each side carries one qubit, `|+1⟩ = |0⟩`, `|−1⟩ = |1⟩`, left qubit
//! first. Tracing out the positions leaves a state supported on
//! `{|01⟩, |10⟩}`.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quadrant::ProjectedPairState;

/// Internal state restricted to `{|+1 −1⟩, |−1 +1⟩}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InternalState {
    /// Weight of `+1` on the left.
    pub p_plus_left: f64,
    pub p_minus_left: f64,
    /// `⟨|+1 −1⟩| ρ |−1 +1⟩⟩`.
    pub coherence: Complex64,
}

impl InternalState {
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [
            [Complex64::from(self.p_plus_left), self.coherence],
            [self.coherence.conj(), Complex64::from(self.p_minus_left)],
        ]
    }

    /// Full two-qubit density matrix in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
    pub fn two_qubit(&self) -> Matrix4<Complex64> {
        let mut rho = Matrix4::zeros();
        rho[(1, 1)] = Complex64::from(self.p_plus_left);
        rho[(2, 2)] = Complex64::from(self.p_minus_left);
        rho[(1, 2)] = self.coherence;
        rho[(2, 1)] = self.coherence.conj();
        rho
    }

    /// Reduced state of the left qubit is diagonal with these entries.
    pub fn single_side_populations(&self) -> [f64; 2] {
        [self.p_plus_left, self.p_minus_left]
    }

    /// Correlation matrix `T_ij = Tr(ρ σ_i ⊗ σ_j)`.
    pub fn correlation_matrix(&self) -> Matrix3<f64> {
        let rho = self.two_qubit();
        let paulis = pauli();
        Matrix3::from_fn(|i, j| (rho * kron(&paulis[i], &paulis[j])).trace().re)
    }
}

pub fn internal_reduced_state(s: &ProjectedPairState) -> InternalState {
    let norm = s.norm();
    InternalState {
        p_plus_left: s.p_plus_left() / norm,
        p_minus_left: s.p_minus_left() / norm,
        coherence: s.branch_overlap() / norm,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BellMetrics {
    /// Overlap with `(|01⟩ + |10⟩)/√2`.
    pub fidelity: f64,
    /// Overlap with the closest `(|01⟩ + e^{iφ}|10⟩)/√2`; insensitive to a
    /// relative phase that a local rotation would undo.
    pub phase_optimized_fidelity: f64,
    /// Maximal CHSH value over local settings.
    pub chsh: f64,
    /// Entanglement of formation, nats.
    pub entropy: f64,
    /// Von Neumann entropy of one side's internal state, nats.
    pub single_side_entropy: f64,
    pub concurrence: f64,
}

fn binary_entropy(p: f64) -> f64 {
    let h = |x: f64| if x > 0.0 { -x * x.ln() } else { 0.0 };
    h(p) + h(1.0 - p)
}

pub fn bell_metrics_of(state: &InternalState) -> BellMetrics {
    let (p1, p2, c) = (state.p_plus_left, state.p_minus_left, state.coherence);
    // populations of |00⟩ and |11⟩ vanish, so C = 2|ρ₁₂|
    let concurrence = (2.0 * c.norm()).min(1.0);
    let x = 0.5 * (1.0 + (1.0 - concurrence * concurrence).max(0.0).sqrt());
    let t = state.correlation_matrix();
    let eig = SymmetricEigen::new(t.transpose() * t);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    BellMetrics {
        fidelity: 0.5 * (p1 + p2) + c.re,
        phase_optimized_fidelity: 0.5 * (p1 + p2) + c.norm(),
        chsh: 2.0 * (ev[0] + ev[1]).max(0.0).sqrt(),
        entropy: binary_entropy(x),
        single_side_entropy: binary_entropy(p1 / (p1 + p2)),
        concurrence,
    }
}

pub fn bell_metrics(s: &ProjectedPairState) -> BellMetrics {
    bell_metrics_of(&internal_reduced_state(s))
}

fn pauli() -> [[[Complex64; 2]; 2]; 3] {
    let (o, l, i) = (Complex64::default(), Complex64::from(1.0), Complex64::i());
    [[[o, l], [l, o]], [[o, -i], [i, o]], [[l, o], [o, -l]]]
}

fn kron(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[r / 2][c / 2] * b[r % 2][c % 2])
}
