//! Reference gates with known entanglement properties.
//!
//! Besides the textbook gates this module builds permutation 2-unitaries
//! `|i, j⟩ ↦ |L1(i,j), L2(i,j)⟩` from a pair of mutually orthogonal Latin
//! squares. The squares are `L_a(i, j) = i + a·j` over the finite field of
//! order `d`, with `a ∈ {1, 2}` (`2` is the element with base-`p` digits
//! `(0, 1)`, i.e. `x` when `d = p^k` with `k > 1`).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{classify, GateLabel};
use crate::tensor::{identity_gate, swap_gate, BipartiteUnitary, CMatrix, C64};

pub const GATE_NAMES: [&str; 6] = ["identity", "swap", "cnot", "dcnot", "fourier", "ols"];

#[derive(Clone, Debug, PartialEq)]
pub struct NamedGate {
    pub name: String,
    pub d: usize,
    pub gate: BipartiteUnitary,
    pub expected_class: GateLabel,
}

impl NamedGate {
    fn checked(name: &str, gate: BipartiteUnitary, expected_class: GateLabel) -> Result<Self> {
        let got = classify(&gate, 1e-10)?.label;
        if got != expected_class {
            return Err(Error::Precondition(format!(
                "gate `{name}` classified as {got}, expected {expected_class}"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            d: gate.d(),
            gate,
            expected_class,
        })
    }
}

fn permutation_gate(d: usize, image: impl Fn(usize, usize) -> (usize, usize)) -> BipartiteUnitary {
    let n = d * d;
    let mut m = CMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            let (a, b) = image(i, j);
            m[(a * d + b, i * d + j)] = C64::new(1.0, 0.0);
        }
    }
    BipartiteUnitary::new(m).expect("a permutation matrix is unitary")
}

fn cnot() -> BipartiteUnitary {
    permutation_gate(2, |i, j| (i, i ^ j))
}

/// CNOT followed by the CNOT with control and target exchanged.
fn dcnot() -> BipartiteUnitary {
    permutation_gate(2, |i, j| (i ^ (i ^ j), i ^ j))
}

/// Discrete Fourier transform on the joint space of dimension `d²`.
pub fn fourier_gate(d: usize) -> Result<BipartiteUnitary> {
    if d < 2 {
        return Err(Error::Dimension(format!("local dimension must be ≥ 2, got {d}")));
    }
    let n = d * d;
    let m = CMatrix::from_fn(n, n, |j, k| {
        let phase = 2.0 * PI * ((j * k) % n) as f64 / n as f64;
        C64::from_polar(1.0 / d as f64, phase)
    });
    BipartiteUnitary::new(m)
}

pub fn named_gate(name: &str, d: usize) -> Result<NamedGate> {
    let qubit_only = |gate: fn() -> BipartiteUnitary| {
        if d == 2 {
            Ok(gate())
        } else {
            Err(Error::Dimension(format!("`{name}` is defined for d = 2 only, got d = {d}")))
        }
    };
    match name {
        "identity" => NamedGate::checked(name, identity_gate(d)?, GateLabel::TDual),
        "swap" => NamedGate::checked(name, swap_gate(d)?, GateLabel::Dual),
        "cnot" => NamedGate::checked(name, qubit_only(cnot)?, GateLabel::TDual),
        "dcnot" => NamedGate::checked(name, qubit_only(dcnot)?, GateLabel::Dual),
        "fourier" => NamedGate::checked(name, fourier_gate(d)?, GateLabel::Dual),
        "ols" => ols_permutation(d),
        other => Err(Error::UnknownGate(other.to_string())),
    }
}

/// Permutation 2-unitary from a pair of orthogonal Latin squares.
pub fn ols_permutation(d: usize) -> Result<NamedGate> {
    let (l1, l2) = mols_pair(d)?;
    let gate = permutation_gate(d, |i, j| (l1.get(i, j), l2.get(i, j)));
    NamedGate::checked("ols", gate, GateLabel::TwoUnitary)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatinSquare {
    pub order: usize,
    /// Row-major symbols in `0..order`.
    pub cells: Vec<usize>,
}

impl LatinSquare {
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.cells[row * self.order + col]
    }

    pub fn is_latin(&self) -> bool {
        let n = self.order;
        (0..n).all(|r| {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            (0..n).all(|c| {
                let (a, b) = (self.get(r, c), self.get(c, r));
                a < n && b < n && !std::mem::replace(&mut row[a], true) && !std::mem::replace(&mut col[b], true)
            })
        })
    }

    /// Every ordered pair of symbols appears exactly once when the squares
    /// are superimposed.
    pub fn is_orthogonal_to(&self, other: &LatinSquare) -> bool {
        let n = self.order;
        if other.order != n {
            return false;
        }
        let mut seen = vec![false; n * n];
        self.cells
            .iter()
            .zip(&other.cells)
            .all(|(&a, &b)| !std::mem::replace(&mut seen[a * n + b], true))
    }
}

/// A pair of mutually orthogonal Latin squares of order `d`.
pub fn mols_pair(d: usize) -> Result<(LatinSquare, LatinSquare)> {
    if d == 2 || d == 6 {
        return Err(Error::Existence(format!("no pair of orthogonal Latin squares of order {d}")));
    }
    if d < 2 {
        return Err(Error::Dimension(format!("order must be ≥ 3, got {d}")));
    }
    let field = FiniteField::new(d).ok_or_else(|| {
        Error::Existence(format!(
            "order {d} is not a prime power; only field constructions are implemented"
        ))
    })?;
    let square = |a: usize| LatinSquare {
        order: d,
        cells: (0..d * d)
            .map(|k| field.add(k / d, field.mul(a, k % d)))
            .collect(),
    };
    Ok((square(1), square(2)))
}

/// `GF(p^k)` with elements encoded as base-`p` digit vectors of polynomial
/// coefficients (lowest degree first).
#[derive(Clone, Debug)]
pub struct FiniteField {
    p: usize,
    k: usize,
    /// Monic irreducible modulus, `k + 1` coefficients.
    modulus: Vec<usize>,
}

impl FiniteField {
    /// `None` unless `q` is a prime power.
    pub fn new(q: usize) -> Option<Self> {
        let p = smallest_prime_factor(q)?;
        let mut k = 0;
        let mut r = q;
        while r % p == 0 {
            r /= p;
            k += 1;
        }
        if r != 1 {
            return None;
        }
        let modulus = irreducible_monic(p, k);
        Some(Self { p, k, modulus })
    }

    pub fn order(&self) -> usize {
        self.p.pow(self.k as u32)
    }

    fn digits(&self, x: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.k);
        let mut x = x;
        for _ in 0..self.k {
            out.push(x % self.p);
            x /= self.p;
        }
        out
    }

    fn encode(&self, digits: &[usize]) -> usize {
        digits.iter().rev().fold(0, |acc, &c| acc * self.p + c)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % self.p).collect();
        self.encode(&sum)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        let (da, db) = (self.digits(a), self.digits(b));
        let mut prod = vec![0usize; 2 * self.k];
        for (i, x) in da.iter().enumerate() {
            for (j, y) in db.iter().enumerate() {
                prod[i + j] = (prod[i + j] + x * y) % self.p;
            }
        }
        // reduce modulo the monic modulus, highest degree first
        for deg in (self.k..2 * self.k).rev() {
            let c = prod[deg];
            if c == 0 {
                continue;
            }
            for (i, m) in self.modulus.iter().enumerate() {
                let slot = deg - self.k + i;
                prod[slot] = (prod[slot] + self.p * self.p - c * m % self.p) % self.p;
            }
        }
        self.encode(&prod[..self.k])
    }
}

fn smallest_prime_factor(n: usize) -> Option<usize> {
    if n < 2 {
        return None;
    }
    (2..=n).find(|f| n % f == 0)
}

/// Lowest monic polynomial of degree `k` over `GF(p)` with no monic factor
/// of degree `1..=k/2`.
fn irreducible_monic(p: usize, k: usize) -> Vec<usize> {
    if k == 1 {
        return vec![0, 1];
    }
    let monic = |deg: usize, code: usize| {
        let mut c: Vec<usize> = (0..deg)
            .scan(code, |r, _| {
                let digit = *r % p;
                *r /= p;
                Some(digit)
            })
            .collect();
        c.push(1);
        c
    };
    let divides = |f: &[usize], g: &[usize]| {
        let mut rem = g.to_vec();
        let df = f.len() - 1;
        for deg in (df..rem.len()).rev() {
            let c = rem[deg];
            if c != 0 {
                for (i, fi) in f.iter().enumerate() {
                    let slot = deg - df + i;
                    rem[slot] = (rem[slot] + p * p - c * fi % p) % p;
                }
            }
        }
        rem[..df].iter().all(|&r| r == 0)
    };
    (0..p.pow(k as u32))
        .map(|code| monic(k, code))
        .find(|g| {
            (1..=k / 2).all(|deg| (0..p.pow(deg as u32)).all(|code| !divides(&monic(deg, code), g)))
        })
        .expect("irreducible polynomials exist in every degree")
}
