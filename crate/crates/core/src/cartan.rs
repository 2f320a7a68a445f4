//! Two-qubit nonlocal coordinates.
//!
//! Every two-qubit gate is locally equivalent to
//! `exp(−i(c1 σx⊗σx + c2 σy⊗σy + c3 σz⊗σz))`. In the magic basis the local
//! group becomes `SO(4)` and the canonical gate is diagonal with phases
//! `e^{−iλ_k}`, so the spectrum of `U_Bᵀ U_B` (for `U_B` the gate in that
//! basis, normalized to unit determinant) fixes the `λ_k` and hence the
//! coordinates. Coordinates are reported in the half chamber
//! `0 ≤ c3 ≤ c2 ≤ c1 ≤ π/4`, with `±c3` identified.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use nalgebra::linalg::Schur;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maps::{apply_map, MapKind};
use crate::tensor::{BipartiteUnitary, CMatrix, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CartanCoords {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl CartanCoords {
    pub fn new(c1: f64, c2: f64, c3: f64) -> Self {
        Self { c1, c2, c3 }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c3]
    }

    pub fn max_abs_diff(&self, other: &CartanCoords) -> f64 {
        self.as_array()
            .iter()
            .zip(other.as_array())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Whether the point lies in `0 ≤ c3 ≤ c2 ≤ c1 ≤ π/4` (with slack).
    pub fn in_half_chamber(&self, slack: f64) -> bool {
        -slack <= self.c3
            && self.c3 <= self.c2 + slack
            && self.c2 <= self.c1 + slack
            && self.c1 <= PI / 4.0 + slack
    }
}

/// Columns are the magic basis states
/// `(|00⟩+|11⟩)/√2, i(|01⟩+|10⟩)/√2, (|01⟩−|10⟩)/√2, i(|00⟩−|11⟩)/√2`.
fn magic_basis() -> CMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    let ih = C64::new(0.0, FRAC_1_SQRT_2);
    let z = C64::new(0.0, 0.0);
    CMatrix::from_row_slice(
        4,
        4,
        &[
            h, z, z, ih, //
            z, ih, h, z, //
            z, ih, -h, z, //
            h, z, z, -ih,
        ],
    )
}

/// Phases `λ_k` of the canonical gate on the magic basis states.
fn magic_phases(c: &CartanCoords) -> [f64; 4] {
    [
        c.c1 - c.c2 + c.c3,
        c.c1 + c.c2 - c.c3,
        -c.c1 - c.c2 - c.c3,
        -c.c1 + c.c2 + c.c3,
    ]
}

/// `exp(−i(c1 XX + c2 YY + c3 ZZ))`.
pub fn canonical_gate(c: &CartanCoords) -> BipartiteUnitary {
    let q = magic_basis();
    let phases = magic_phases(c);
    let diag = CMatrix::from_fn(4, 4, |i, j| {
        if i == j {
            C64::from_polar(1.0, -phases[i])
        } else {
            C64::new(0.0, 0.0)
        }
    });
    BipartiteUnitary::new(&q * diag * q.adjoint()).expect("canonical gates are unitary")
}

fn require_qubits(u: &BipartiteUnitary) -> Result<()> {
    if u.d() != 2 {
        return Err(Error::Dimension(format!(
            "Cartan coordinates need d = 2, got d = {}",
            u.d()
        )));
    }
    Ok(())
}

/// `U_Bᵀ U_B` with `U_B = Q† U Q / det(U)^{1/4}`.
fn magic_gram(u: &BipartiteUnitary) -> CMatrix {
    let q = magic_basis();
    let det = u.matrix().determinant();
    let norm = det.powf(0.25);
    let ub = q.adjoint() * u.matrix() * &q / norm;
    ub.transpose() * ub
}

fn fold(c: f64) -> f64 {
    let t = c.rem_euclid(FRAC_PI_2);
    t.min(FRAC_PI_2 - t)
}

pub fn cartan_coords(u: &BipartiteUnitary) -> Result<CartanCoords> {
    require_qubits(u)?;
    let gram = magic_gram(u);
    let eig = Schur::new(gram)
        .eigenvalues()
        .ok_or_else(|| Error::Precondition("eigenvalue decomposition failed".into()))?;
    let mut lambda: Vec<f64> = eig.iter().map(|z| -z.arg() / 2.0).collect();
    // restore Σλ = 0 exactly; the remaining freedom only shifts c_j by π/2
    let m = (lambda.iter().sum::<f64>() / PI).round();
    lambda[3] -= m * PI;
    let (l1, l2, l3, l4) = (lambda[0], lambda[1], lambda[2], lambda[3]);
    let mut c = [
        fold((l1 + l2 - l3 - l4) / 4.0),
        fold((l2 + l4 - l1 - l3) / 4.0),
        fold((l1 + l4 - l2 - l3) / 4.0),
    ];
    c.sort_by(|a, b| b.total_cmp(a));
    Ok(CartanCoords::new(c[0], c[1], c[2]))
}

/// Makhlin's local invariants `(G1, G2)`. `G1` is complex; under the
/// `±c3` identification it is only defined up to conjugation.
pub fn makhlin_invariants(u: &BipartiteUnitary) -> Result<(C64, f64)> {
    require_qubits(u)?;
    let q = magic_basis();
    let ub = q.adjoint() * u.matrix() * &q;
    let m = ub.transpose() * &ub;
    let det = u.matrix().determinant();
    let tr = m.trace();
    let tr2 = (&m * &m).trace();
    let g1 = tr * tr / (det * 16.0);
    let g2 = (tr * tr - tr2) / (det * 4.0);
    Ok((g1, g2.re))
}

/// Coordinates of `U_k` for `k = 0..=n` along a map trajectory.
pub fn chamber_trajectory(u0: &BipartiteUnitary, kind: MapKind, n: usize) -> Result<Vec<CartanCoords>> {
    require_qubits(u0)?;
    let mut out = Vec::with_capacity(n + 1);
    let mut u = u0.clone();
    out.push(cartan_coords(&u)?);
    for _ in 0..n {
        u = apply_map(&u, kind)?.next;
        out.push(cartan_coords(&u)?);
    }
    Ok(out)
}
