//! Dense complex matrices on `C^d ⊗ C^d` and the index reshuffles acting on
//! them.
//!
//! Composite indices follow a single global convention: the basis state
//! `|i⟩_A |j⟩_B` sits at position `n = d·i + j` (A major, B minor). Every
//! reshuffle in this module is an exact permutation of matrix entries, so
//! involutions hold bit-for-bit and the Hilbert–Schmidt norm is preserved.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default unitarity tolerance per unit of `d²`.
pub const UNITARITY_TOL_PER_DIM: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Returns the local dimension `d` for a square matrix of order `d²`.
pub fn local_dim(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    local_dim_of_order(m.nrows())
}

pub(crate) fn local_dim_of_order(order: usize) -> Result<usize> {
    let d = (order as f64).sqrt().round() as usize;
    if d < 2 || d * d != order {
        return Err(Error::Dimension(format!(
            "order {order} is not d² for an integer d ≥ 2"
        )));
    }
    Ok(d)
}

/// `⟨nm|X^R|αβ⟩ = ⟨nα|X|mβ⟩`.
pub fn realign(x: &CMatrix) -> Result<CMatrix> {
    let d = local_dim(x)?;
    Ok(realign_unchecked(x, d))
}

/// `⟨mα|X^{T_A}|nβ⟩ = ⟨nα|X|mβ⟩`.
pub fn partial_transpose(x: &CMatrix) -> Result<CMatrix> {
    let d = local_dim(x)?;
    Ok(partial_transpose_unchecked(x, d))
}

pub(crate) fn realign_unchecked(x: &CMatrix, d: usize) -> CMatrix {
    let n = d * d;
    CMatrix::from_fn(n, n, |row, col| {
        let (a, a2) = (row / d, row % d);
        let (b, b2) = (col / d, col % d);
        x[(a * d + b, a2 * d + b2)]
    })
}

pub(crate) fn partial_transpose_unchecked(x: &CMatrix, d: usize) -> CMatrix {
    let n = d * d;
    CMatrix::from_fn(n, n, |row, col| {
        let (m, alpha) = (row / d, row % d);
        let (nn, beta) = (col / d, col % d);
        x[(nn * d + alpha, m * d + beta)]
    })
}

/// Kronecker product `a ⊗ b` in the A-major convention.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Row-vectorization `|X⟩` with entries `X_{ij}` at position `i·cols + j`.
pub fn row_vec(x: &CMatrix) -> CVector {
    let cols = x.ncols();
    CVector::from_fn(x.nrows() * cols, |k, _| x[(k / cols, k % cols)])
}

pub fn hs_norm(x: &CMatrix) -> f64 {
    x.norm()
}

/// `‖X†X − I‖_HS`.
pub fn unitarity_defect(x: &CMatrix) -> f64 {
    if x.nrows() != x.ncols() {
        return f64::INFINITY;
    }
    let mut g = x.adjoint() * x;
    for i in 0..g.nrows() {
        g[(i, i)] -= ONE;
    }
    g.norm()
}

pub fn is_finite(x: &CMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// A unitary on `C^d ⊗ C^d`, stored as a dense matrix of order `d²`.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteUnitary {
    d: usize,
    matrix: CMatrix,
}

impl BipartiteUnitary {
    /// Validates with the default tolerance `1e-10 · d²`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let d = local_dim(&matrix)?;
        Self::with_tolerance(matrix, UNITARITY_TOL_PER_DIM * (d * d) as f64)
    }

    pub fn with_tolerance(matrix: CMatrix, tol: f64) -> Result<Self> {
        let d = local_dim(&matrix)?;
        if !is_finite(&matrix) {
            return Err(Error::Precondition("matrix has non-finite entries".into()));
        }
        let defect = unitarity_defect(&matrix);
        if !(defect <= tol) {
            return Err(Error::NotUnitary { defect, tol });
        }
        Ok(Self { d, matrix })
    }

    /// Wraps a matrix known to be unitary by construction.
    pub(crate) fn from_trusted(d: usize, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), d * d);
        Self { d, matrix }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn realigned(&self) -> CMatrix {
        realign_unchecked(&self.matrix, self.d)
    }

    pub fn partial_transposed(&self) -> CMatrix {
        partial_transpose_unchecked(&self.matrix, self.d)
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    /// `self · other`.
    pub fn compose(&self, other: &BipartiteUnitary) -> Result<BipartiteUnitary> {
        if self.d != other.d {
            return Err(Error::Dimension(format!(
                "cannot compose gates with d = {} and d = {}",
                self.d, other.d
            )));
        }
        Ok(Self::from_trusted(self.d, &self.matrix * &other.matrix))
    }

    /// `(a ⊗ b) · self · (c ⊗ e)` for single-site unitaries.
    pub fn dressed(&self, a: &CMatrix, b: &CMatrix, c: &CMatrix, e: &CMatrix) -> Result<Self> {
        for m in [a, b, c, e] {
            if m.nrows() != self.d || m.ncols() != self.d {
                return Err(Error::Dimension(format!(
                    "local unitary of order {} does not match d = {}",
                    m.nrows(),
                    self.d
                )));
            }
        }
        let left = kron(a, b);
        let right = kron(c, e);
        Self::new(left * &self.matrix * right)
    }

    /// Removes the global phase by making the largest-modulus entry real
    /// and positive. Used when comparing operators up to phase.
    pub fn phase_fixed(&self) -> CMatrix {
        let pivot = self
            .matrix
            .iter()
            .copied()
            .fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            ONE
        };
        self.matrix.map(|z| z * phase)
    }
}

/// Distance between two operators after fixing each one's global phase.
pub fn phase_insensitive_distance(a: &BipartiteUnitary, b: &BipartiteUnitary) -> f64 {
    (a.phase_fixed() - b.phase_fixed()).norm()
}

/// The swap gate `|i⟩|j⟩ ↦ |j⟩|i⟩`.
pub fn swap_gate(d: usize) -> Result<BipartiteUnitary> {
    if d < 2 {
        return Err(Error::Dimension(format!("local dimension must be ≥ 2, got {d}")));
    }
    let n = d * d;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            m[(j * d + i, i * d + j)] = ONE;
        }
    }
    Ok(BipartiteUnitary::from_trusted(d, m))
}

pub fn identity_gate(d: usize) -> Result<BipartiteUnitary> {
    if d < 2 {
        return Err(Error::Dimension(format!("local dimension must be ≥ 2, got {d}")));
    }
    Ok(BipartiteUnitary::from_trusted(d, CMatrix::identity(d * d, d * d)))
}

/// The state `|X⟩ = (X ⊗ I)|Φ⁺⟩` for a single-site operator, with its norm
/// before normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedOperator {
    pub state: CVector,
    pub raw_norm: f64,
}

pub fn vectorize_operator(x: &CMatrix) -> Result<VectorizedOperator> {
    if x.nrows() != x.ncols() || x.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a nonempty square matrix, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    let d = x.nrows() as f64;
    let raw = row_vec(x) / C64::from(d.sqrt());
    let raw_norm = raw.norm();
    if raw_norm == 0.0 {
        return Err(Error::Degenerate("cannot vectorize the zero operator".into()));
    }
    Ok(VectorizedOperator {
        state: raw / C64::from(raw_norm),
        raw_norm,
    })
}

/// A pure state on `A ⊗ A′ ⊗ B ⊗ B′`, amplitude of `|a a′ b b′⟩` at
/// `((a·d + a′)·d + b)·d + b′`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourPartyState {
    d: usize,
    amplitudes: CVector,
}

impl FourPartyState {
    pub fn new(d: usize, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != d.pow(4) {
            return Err(Error::Dimension(format!(
                "expected {} amplitudes for d = {d}, got {}",
                d.pow(4),
                amplitudes.len()
            )));
        }
        Ok(Self { d, amplitudes })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, a: usize, a2: usize, b: usize, b2: usize) -> C64 {
        let d = self.d;
        self.amplitudes[((a * d + a2) * d + b) * d + b2]
    }

    /// Linear entropy `1 − tr ρ²` of the reduced state on the two parties in
    /// `keep` (indices into `[A, A′, B, B′]`).
    pub fn pair_linear_entropy(&self, keep: [usize; 2]) -> f64 {
        let d = self.d;
        let rest: Vec<usize> = (0..4).filter(|p| !keep.contains(p)).collect();
        let mut m = CMatrix::zeros(d * d, d * d);
        let mut idx = [0usize; 4];
        for flat in 0..d.pow(4) {
            let mut r = flat;
            for slot in (0..4).rev() {
                idx[slot] = r % d;
                r /= d;
            }
            let row = idx[keep[0]] * d + idx[keep[1]];
            let col = idx[rest[0]] * d + idx[rest[1]];
            m[(row, col)] = self.amplitudes[flat];
        }
        let rho = &m * m.adjoint();
        let purity: f64 = rho.iter().map(|z| z.norm_sqr()).sum();
        1.0 - purity
    }
}

/// The four-party state `(U_AB ⊗ I_{A′B′}) |Φ⁺⟩_{AA′} |Φ⁺⟩_{BB′}`.
pub fn ame_state(u: &BipartiteUnitary) -> FourPartyState {
    let d = u.d();
    let m = u.matrix();
    let inv_d = 1.0 / d as f64;
    let amplitudes = CVector::from_fn(d.pow(4), |flat, _| {
        let b2 = flat % d;
        let b = (flat / d) % d;
        let a2 = (flat / (d * d)) % d;
        let a = flat / (d * d * d);
        m[(a * d + b, a2 * d + b2)] * inv_d
    });
    FourPartyState { d, amplitudes }
}

/// Linear entropies of the three inequivalent bipartitions of a four-party
/// state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartitionEntropies {
    /// `AB | A′B′`
    pub ab: f64,
    /// `AA′ | BB′`, equal to `E(U)` of the generating gate.
    pub aa: f64,
    /// `A′B | AB′`, equal to `E(US)`.
    pub ab_cross: f64,
}

impl BipartitionEntropies {
    pub fn as_array(&self) -> [f64; 3] {
        [self.ab, self.aa, self.ab_cross]
    }
}

pub fn bipartition_entropies(s: &FourPartyState) -> Result<BipartitionEntropies> {
    let norm = s.amplitudes.norm();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "state norm {norm} differs from 1"
        )));
    }
    // parties: 0 = A, 1 = A′, 2 = B, 3 = B′
    Ok(BipartitionEntropies {
        ab: s.pair_linear_entropy([0, 2]),
        aa: s.pair_linear_entropy([0, 1]),
        ab_cross: s.pair_linear_entropy([1, 2]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMatrix::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn realign_rejects_bad_shapes() {
        assert!(matches!(realign(&CMatrix::zeros(4, 5)), Err(Error::Dimension(_))));
        assert!(matches!(realign(&CMatrix::zeros(5, 5)), Err(Error::Dimension(_))));
        assert!(matches!(partial_transpose(&CMatrix::zeros(1, 1)), Err(Error::Dimension(_))));
    }

    #[test]
    fn involutions_are_exact() {
        for d in 2..=4 {
            let x = pseudo_random(d * d, d * d, d as u64);
            assert_eq!(realign(&realign(&x).unwrap()).unwrap(), x);
            assert_eq!(partial_transpose(&partial_transpose(&x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn realign_of_product_is_outer_product() {
        let d = 3;
        let a = pseudo_random(d, d, 11);
        let b = pseudo_random(d, d, 12);
        let r = realign(&kron(&a, &b)).unwrap();
        let outer = row_vec(&a) * row_vec(&b.conjugate()).adjoint();
        assert!((r - outer).norm() < 1e-13);
    }

    #[test]
    fn partial_transpose_of_product_transposes_first_factor() {
        let d = 3;
        let a = pseudo_random(d, d, 21);
        let b = pseudo_random(d, d, 22);
        let pt = partial_transpose(&kron(&a, &b)).unwrap();
        assert!((pt - kron(&a.transpose(), &b)).norm() < 1e-15);
    }

    #[test]
    fn swap_is_an_involutive_permutation() {
        let s2 = swap_gate(2).unwrap();
        // |0,1⟩ = index 1 maps to |1,0⟩ = index 2
        let e01 = CVector::from_fn(4, |k, _| if k == 1 { ONE } else { ZERO });
        let out = s2.matrix() * e01;
        assert_eq!(out[2], ONE);
        assert_eq!(out.iter().filter(|z| z.norm() > 0.0).count(), 1);

        let s3 = swap_gate(3).unwrap();
        let sq = s3.matrix() * s3.matrix();
        assert_eq!(sq, CMatrix::identity(9, 9));
        assert!(unitarity_defect(&realign(s3.matrix()).unwrap()) < 1e-14);
        assert!(swap_gate(1).is_err());
    }

    #[test]
    fn partial_transpose_of_swap_is_scaled_bell_projector() {
        // SWAP^{T_A} = d |Φ⁺⟩⟨Φ⁺|: one singular value d, the rest zero.
        for d in [2usize, 3] {
            let pt = swap_gate(d).unwrap().partial_transposed();
            let sv = pt.singular_values();
            let mut s: Vec<f64> = sv.iter().copied().collect();
            s.sort_by(|a, b| b.partial_cmp(a).unwrap());
            assert!((s[0] - d as f64).abs() < 1e-12);
            assert!(s[1..].iter().all(|x| x.abs() < 1e-12));
            assert!((s.iter().sum::<f64>() - d as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn vectorize_identity_and_projector() {
        let v = vectorize_operator(&CMatrix::identity(3, 3)).unwrap();
        assert!((v.raw_norm - 1.0).abs() < 1e-15);
        let phi = 1.0 / 3f64.sqrt();
        for k in 0..9 {
            let want = if k % 4 == 0 { phi } else { 0.0 };
            assert!((v.state[k] - C64::from(want)).norm() < 1e-15);
        }

        let mut p = CMatrix::zeros(2, 2);
        p[(0, 0)] = ONE;
        let v = vectorize_operator(&p).unwrap();
        assert!((v.raw_norm - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((v.state[0] - ONE).norm() < 1e-15);

        assert!(matches!(
            vectorize_operator(&CMatrix::zeros(2, 2)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn ame_state_of_identity_is_two_bell_pairs() {
        let d = 3;
        let s = ame_state(&identity_gate(d).unwrap());
        for a in 0..d {
            for a2 in 0..d {
                for b in 0..d {
                    for b2 in 0..d {
                        let want = if a == a2 && b == b2 { 1.0 / d as f64 } else { 0.0 };
                        assert!((s.amplitude(a, a2, b, b2) - C64::from(want)).norm() < 1e-15);
                    }
                }
            }
        }
    }

    #[test]
    fn bipartitions_of_swap_and_identity() {
        for d in 2..=4 {
            let max = 1.0 - 1.0 / (d * d) as f64;
            let e = bipartition_entropies(&ame_state(&swap_gate(d).unwrap())).unwrap();
            assert!((e.ab - max).abs() < 1e-12);
            assert!((e.aa - max).abs() < 1e-12);
            assert!(e.ab_cross.abs() < 1e-12);

            let e = bipartition_entropies(&ame_state(&identity_gate(d).unwrap())).unwrap();
            assert!((e.ab - max).abs() < 1e-12);
            assert!(e.aa.abs() < 1e-12);
            assert!((e.ab_cross - max).abs() < 1e-12);
        }
    }

    #[test]
    fn bipartition_entropies_rejects_unnormalized() {
        let s = FourPartyState::new(2, CVector::from_element(16, C64::from(1.0))).unwrap();
        assert!(matches!(bipartition_entropies(&s), Err(Error::Precondition(_))));
        assert!(FourPartyState::new(2, CVector::zeros(15)).is_err());
    }

    #[test]
    fn bipartite_unitary_validation() {
        assert!(matches!(
            BipartiteUnitary::new(CMatrix::identity(4, 4) * C64::from(2.0)),
            Err(Error::NotUnitary { .. })
        ));
        assert!(BipartiteUnitary::new(CMatrix::identity(3, 3)).is_err());
        let mut m = CMatrix::identity(4, 4);
        m[(0, 0)] = C64::new(f64::NAN, 0.0);
        assert!(BipartiteUnitary::new(m).is_err());
    }
}
