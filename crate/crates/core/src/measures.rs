//! Local-unitary invariants of bipartite operators.
//!
//! The operator Schmidt values `λ_j` are the squared singular values of the
//! realigned operator. With `p_j = λ_j / d²` every Tsallis entropy
//! `S_q = (1 − Σ p_j^q)/(q − 1)` is an operator-entanglement measure;
//! `E(U) = S_2(U)`. The same construction on the partial transpose gives
//! `E(US)`, and the two combine into the entangling power
//! `e_p = d²[E(U) + E(US) − E(S)]/(d + 1)²`.
//!
//! Near the maximum, `E(U)` is evaluated through its gap
//! `E_max − E(U) = ‖U^R U^R† − I‖²_HS / d⁴`, which keeps full relative
//! precision when the gap is many orders of magnitude below one.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::haar_product_state;
use crate::tensor::{BipartiteUnitary, CMatrix, C64};

/// Default tolerance on the entropy gaps used by [`classify`].
pub const DEFAULT_CLASS_TOL: f64 = 1e-8;

/// Exponents reported in every [`MeasureRecord`].
pub const DEFAULT_TSALLIS_QS: [f64; 3] = [0.5, 2.0, 3.0];

/// `E_max = 1 − 1/d²`, the operator entanglement of SWAP.
pub fn max_op_entanglement(d: usize) -> f64 {
    1.0 - 1.0 / (d * d) as f64
}

/// `e_p^max = (d − 1)/(d + 1)`.
pub fn max_entangling_power(d: usize) -> f64 {
    (d as f64 - 1.0) / (d as f64 + 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchmidtSpectrum {
    pub d: usize,
    /// Descending, `d²` entries.
    pub values: Vec<f64>,
}

impl SchmidtSpectrum {
    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let norm = (self.d * self.d) as f64;
        self.values.iter().map(move |l| l / norm)
    }
}

fn sorted_singular_values(m: &CMatrix) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

pub fn schmidt_spectrum(u: &BipartiteUnitary) -> SchmidtSpectrum {
    let values = sorted_singular_values(&u.realigned())
        .into_iter()
        .map(|s| s * s)
        .collect();
    SchmidtSpectrum { d: u.d(), values }
}

/// `‖G G† − I‖²_HS / d⁴`: the distance of the reshuffled operator from a
/// unitary, in units of the linear entropy.
pub(crate) fn reshuffled_gap(reshuffled: &CMatrix, d: usize) -> f64 {
    let mut g = reshuffled * reshuffled.adjoint();
    for i in 0..g.nrows() {
        g[(i, i)] -= C64::new(1.0, 0.0);
    }
    g.norm_squared() / (d as f64).powi(4)
}

/// `E_max − E(U)`.
pub fn op_entanglement_gap(u: &BipartiteUnitary) -> f64 {
    reshuffled_gap(&u.realigned(), u.d())
}

/// `E_max − E(US)`.
pub fn op_entanglement_swapped_gap(u: &BipartiteUnitary) -> f64 {
    reshuffled_gap(&u.partial_transposed(), u.d())
}

/// Operator entanglement `E(U) = 1 − tr[(U^R U^R†)²]/d⁴`.
pub fn op_entanglement(u: &BipartiteUnitary) -> f64 {
    max_op_entanglement(u.d()) - op_entanglement_gap(u)
}

/// `E(US) = 1 − tr[(U^{T_A} U^{T_A}†)²]/d⁴`.
pub fn op_entanglement_swapped(u: &BipartiteUnitary) -> f64 {
    max_op_entanglement(u.d()) - op_entanglement_swapped_gap(u)
}

pub fn tsallis_from_spectrum(spectrum: &SchmidtSpectrum, q: f64) -> Result<f64> {
    if !(q > 0.0) || q == 1.0 || !q.is_finite() {
        return Err(Error::Parameter(format!(
            "Tsallis exponent must be positive, finite and ≠ 1, got {q}"
        )));
    }
    let sum: f64 = spectrum
        .probabilities()
        .map(|p| {
            // tiny values would otherwise dominate p^q for q < 1
            let p = if q < 1.0 && p * ((spectrum.d * spectrum.d) as f64) < 1e-14 {
                0.0
            } else {
                p.max(0.0)
            };
            p.powf(q)
        })
        .sum();
    Ok((1.0 - sum) / (q - 1.0))
}

pub fn tsallis_entropy(u: &BipartiteUnitary, q: f64) -> Result<f64> {
    tsallis_from_spectrum(&schmidt_spectrum(u), q)
}

/// `‖U^R‖_1`, the sum of singular values of the realigned operator.
pub fn trace_norm_realigned(u: &BipartiteUnitary) -> f64 {
    u.realigned().singular_values().iter().sum()
}

pub fn entangling_power(u: &BipartiteUnitary) -> f64 {
    let d = u.d();
    entangling_power_from_gaps(d, op_entanglement_gap(u), op_entanglement_swapped_gap(u))
}

pub(crate) fn entangling_power_from_gaps(d: usize, gap_u: f64, gap_us: f64) -> f64 {
    let df = d as f64;
    let scale = df * df / ((df + 1.0) * (df + 1.0));
    scale * (max_op_entanglement(d) - gap_u - gap_us)
}

/// Linear entropy `1 − tr ρ_A²` of a pure state on `C^d ⊗ C^d` given in the
/// A-major layout.
pub fn state_linear_entropy(psi: &[C64], d: usize) -> f64 {
    debug_assert_eq!(psi.len(), d * d);
    let m = CMatrix::from_row_slice(d, d, psi);
    let rho = &m * m.adjoint();
    1.0 - rho.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Monte-Carlo estimate of the entangling power with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
    pub n_samples: usize,
}

/// Average linear entropy produced by `u` on Haar-random product inputs.
pub fn entangling_power_mc<R: Rng + ?Sized>(
    u: &BipartiteUnitary,
    n_samples: usize,
    rng: &mut R,
) -> Result<McEstimate> {
    if n_samples < 100 {
        return Err(Error::Parameter(format!(
            "need at least 100 samples, got {n_samples}"
        )));
    }
    let d = u.d();
    let m = u.matrix();
    let mut product = vec![C64::new(0.0, 0.0); d * d];
    let mut out = vec![C64::new(0.0, 0.0); d * d];
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_samples {
        let (a, b) = haar_product_state(d, rng);
        for i in 0..d {
            for j in 0..d {
                product[i * d + j] = a[i] * b[j];
            }
        }
        for (r, slot) in out.iter_mut().enumerate() {
            *slot = (0..d * d).map(|c| m[(r, c)] * product[c]).sum();
        }
        let e = state_linear_entropy(&out, d);
        sum += e;
        sum_sq += e * e;
    }
    let n = n_samples as f64;
    let mean = sum / n;
    let var = ((sum_sq / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        mean,
        std_err: (var / n).sqrt(),
        n_samples,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GateLabel {
    #[serde(rename = "generic")]
    Generic,
    #[serde(rename = "dual")]
    Dual,
    #[serde(rename = "T_dual")]
    TDual,
    #[serde(rename = "two_unitary")]
    TwoUnitary,
}

impl GateLabel {
    pub const ALL: [GateLabel; 4] = [
        GateLabel::Generic,
        GateLabel::Dual,
        GateLabel::TDual,
        GateLabel::TwoUnitary,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GateLabel::Generic => "generic",
            GateLabel::Dual => "dual",
            GateLabel::TDual => "T_dual",
            GateLabel::TwoUnitary => "two_unitary",
        }
    }

    pub fn from_gaps(gap_u: f64, gap_us: f64, tol: f64) -> Self {
        match (gap_u < tol, gap_us < tol) {
            (true, true) => GateLabel::TwoUnitary,
            (true, false) => GateLabel::Dual,
            (false, true) => GateLabel::TDual,
            (false, false) => GateLabel::Generic,
        }
    }

    /// Dual in the wide sense: `two_unitary` counts.
    pub fn is_dual(&self) -> bool {
        matches!(self, GateLabel::Dual | GateLabel::TwoUnitary)
    }

    pub fn is_t_dual(&self) -> bool {
        matches!(self, GateLabel::TDual | GateLabel::TwoUnitary)
    }
}

impl fmt::Display for GateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GateLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GateLabel::ALL
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| Error::Parse(format!("unknown gate class `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateClass {
    pub label: GateLabel,
    pub tolerance: f64,
}

pub fn classify(u: &BipartiteUnitary, tol: f64) -> Result<GateClass> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    let label = GateLabel::from_gaps(op_entanglement_gap(u), op_entanglement_swapped_gap(u), tol);
    Ok(GateClass { label, tolerance: tol })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsallisValue {
    pub q: f64,
    pub value: f64,
}

/// Scalar invariants of one operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureRecord {
    pub d: usize,
    #[serde(rename = "E_U")]
    pub e_u: f64,
    #[serde(rename = "E_US")]
    pub e_us: f64,
    pub ep: f64,
    pub trace_norm_r: f64,
    /// `E_max − E(U)`, kept separately for precision.
    pub gap_u: f64,
    /// `E_max − E(US)`.
    pub gap_us: f64,
    pub tsallis: Vec<TsallisValue>,
}

impl MeasureRecord {
    pub fn classify(&self, tol: f64) -> GateClass {
        GateClass {
            label: GateLabel::from_gaps(self.gap_u, self.gap_us, tol),
            tolerance: tol,
        }
    }

    pub fn ep_ratio(&self) -> f64 {
        self.ep / max_entangling_power(self.d)
    }
}

pub fn measure(u: &BipartiteUnitary) -> MeasureRecord {
    measure_with(u, &DEFAULT_TSALLIS_QS).expect("default exponents are valid")
}

pub fn measure_with(u: &BipartiteUnitary, qs: &[f64]) -> Result<MeasureRecord> {
    let d = u.d();
    let realigned = u.realigned();
    let sv = sorted_singular_values(&realigned);
    let spectrum = SchmidtSpectrum {
        d,
        values: sv.iter().map(|s| s * s).collect(),
    };
    let gap_u = reshuffled_gap(&realigned, d);
    let gap_us = op_entanglement_swapped_gap(u);
    let tsallis = qs
        .iter()
        .map(|&q| Ok(TsallisValue { q, value: tsallis_from_spectrum(&spectrum, q)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(MeasureRecord {
        d,
        e_u: max_op_entanglement(d) - gap_u,
        e_us: max_op_entanglement(d) - gap_us,
        ep: entangling_power_from_gaps(d, gap_u, gap_us),
        trace_norm_r: sv.iter().sum(),
        gap_u,
        gap_us,
        tsallis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{cue_sample, RngSeed};
    use crate::tensor::{identity_gate, kron, swap_gate};

    fn cnot() -> BipartiteUnitary {
        let mut m = CMatrix::zeros(4, 4);
        for (r, c) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[(r, c)] = C64::new(1.0, 0.0);
        }
        BipartiteUnitary::new(m).unwrap()
    }

    fn random_gate(d: usize, stream: u64) -> BipartiteUnitary {
        BipartiteUnitary::new(cue_sample(d * d, RngSeed::new(5, stream))).unwrap()
    }

    fn local_product(d: usize, stream: u64) -> BipartiteUnitary {
        let a = cue_sample(d, RngSeed::new(6, 2 * stream));
        let b = cue_sample(d, RngSeed::new(6, 2 * stream + 1));
        BipartiteUnitary::new(kron(&a, &b)).unwrap()
    }

    #[test]
    fn spectrum_of_products_swap_and_cnot() {
        for d in 2..=4 {
            let s = schmidt_spectrum(&local_product(d, d as u64));
            assert!((s.values[0] - (d * d) as f64).abs() < 1e-10);
            assert!(s.values[1..].iter().all(|l| l.abs() < 1e-10));

            let s = schmidt_spectrum(&swap_gate(d).unwrap());
            assert!(s.values.iter().all(|l| (l - 1.0).abs() < 1e-12));
        }
        let s = schmidt_spectrum(&cnot());
        let want = [2.0, 2.0, 0.0, 0.0];
        for (got, want) in s.values.iter().zip(want) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_sums_to_d_squared_and_matches_entanglement() {
        for d in 2..=5 {
            let u = random_gate(d, d as u64);
            let s = schmidt_spectrum(&u);
            assert!((s.sum() - (d * d) as f64).abs() < 1e-9);
            assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
            let from_spectrum =
                1.0 - s.values.iter().map(|l| l * l).sum::<f64>() / (d as f64).powi(4);
            assert!((from_spectrum - op_entanglement(&u)).abs() < 1e-12);
        }
    }

    #[test]
    fn entanglement_extremes() {
        for d in 2..=4 {
            let max = max_op_entanglement(d);
            assert!(op_entanglement(&local_product(d, 1)).abs() < 1e-12);
            assert!((op_entanglement(&swap_gate(d).unwrap()) - max).abs() < 1e-14);
            assert!(op_entanglement_swapped(&swap_gate(d).unwrap()).abs() < 1e-14);
            assert!((op_entanglement_swapped(&identity_gate(d).unwrap()) - max).abs() < 1e-14);
        }
        assert!((op_entanglement(&swap_gate(2).unwrap()) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn swapped_entanglement_two_routes() {
        for d in 2..=4 {
            for stream in 0..3 {
                let u = random_gate(d, 10 + stream);
                let us = u.compose(&swap_gate(d).unwrap()).unwrap();
                assert!((op_entanglement_swapped(&u) - op_entanglement(&us)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn tsallis_values() {
        for d in 2..=4 {
            let p = local_product(d, 3);
            for q in [0.5, 2.0, 3.0, 0.3] {
                assert!(tsallis_entropy(&p, q).unwrap().abs() < 1e-9);
            }
            let s = swap_gate(d).unwrap();
            let want = 2.0 * (d as f64 - 1.0);
            assert!((tsallis_entropy(&s, 0.5).unwrap() - want).abs() < 1e-12);

            let u = random_gate(d, 40);
            assert!((tsallis_entropy(&u, 2.0).unwrap() - op_entanglement(&u)).abs() < 1e-12);
            let half = 2.0 * (trace_norm_realigned(&u) / d as f64 - 1.0);
            assert!((tsallis_entropy(&u, 0.5).unwrap() - half).abs() < 1e-10);
        }
        let u = swap_gate(2).unwrap();
        for q in [0.0, -1.0, 1.0, f64::NAN] {
            assert!(matches!(tsallis_entropy(&u, q), Err(Error::Parameter(_))));
        }
    }

    #[test]
    fn trace_norm_bounds() {
        for d in 2..=4 {
            assert!((trace_norm_realigned(&swap_gate(d).unwrap()) - (d * d) as f64).abs() < 1e-12);
            assert!((trace_norm_realigned(&local_product(d, 7)) - d as f64).abs() < 1e-10);
            let t = trace_norm_realigned(&random_gate(d, 8));
            assert!(t > d as f64 && t < (d * d) as f64);
        }
    }

    #[test]
    fn entangling_power_reference_values() {
        assert!(entangling_power(&swap_gate(3).unwrap()).abs() < 1e-14);
        assert!((entangling_power(&cnot()) - 2.0 / 9.0).abs() < 1e-12);
        for d in 2..=5 {
            let u = random_gate(d, 70);
            let ep = entangling_power(&u);
            assert!(ep >= 0.0 && ep <= max_entangling_power(d));
        }
    }

    #[test]
    fn mc_swap_is_exactly_zero() {
        let mut rng = RngSeed::new(1, 1).rng();
        let est = entangling_power_mc(&swap_gate(3).unwrap(), 500, &mut rng).unwrap();
        assert!(est.mean.abs() < 1e-14);
        assert!(est.std_err < 1e-14);
        assert!(entangling_power_mc(&swap_gate(3).unwrap(), 99, &mut rng).is_err());
    }

    #[test]
    fn mc_cnot_matches_closed_form() {
        let mut rng = RngSeed::new(2, 0).rng();
        let est = entangling_power_mc(&cnot(), 100_000, &mut rng).unwrap();
        assert!((est.mean - 2.0 / 9.0).abs() < 3.0 * est.std_err, "{est:?}");
        assert!((est.mean - 2.0 / 9.0).abs() < 0.003);
    }

    #[test]
    fn classification() {
        let swap = swap_gate(3).unwrap();
        assert_eq!(classify(&swap, 1e-8).unwrap().label, GateLabel::Dual);
        assert_eq!(classify(&identity_gate(3).unwrap(), 1e-8).unwrap().label, GateLabel::TDual);
        assert_eq!(classify(&random_gate(3, 1), 1e-8).unwrap().label, GateLabel::Generic);
        assert!(classify(&swap, 0.0).is_err());
        assert!(GateLabel::TwoUnitary.is_dual() && GateLabel::TwoUnitary.is_t_dual());
        assert_eq!("T_dual".parse::<GateLabel>().unwrap(), GateLabel::TDual);
    }

    #[test]
    fn measure_record_is_consistent() {
        let u = random_gate(3, 99);
        let r = measure(&u);
        let d = 3.0f64;
        let ep = d * d * (r.e_u + r.e_us - (1.0 - 1.0 / (d * d))) / ((d + 1.0) * (d + 1.0));
        assert!((ep - r.ep).abs() < 1e-12);
        assert!(r.trace_norm_r >= d && r.trace_norm_r <= d * d);
        assert_eq!(r.tsallis.len(), 3);
        assert!((r.tsallis[1].value - r.e_u).abs() < 1e-12);
    }
}
