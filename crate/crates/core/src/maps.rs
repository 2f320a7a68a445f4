//! Nearest-unitary projection and the nonlinear maps built on it.
//!
//! Each map applies a linear index reshuffle (realignment `R`, partial
//! transpose `T`, or `T∘R`) and then projects back onto the unitary group by
//! taking the unitary polar factor. The projection is exact through the SVD
//! `M = P Σ Q†  ↦  P Q†`, and its squared Hilbert–Schmidt distance is
//! `Σ (σ_i − 1)²`, which equals `2d² − 2‖M‖_1` whenever `‖M‖_HS = d`.
//!
//! Under `M_R` the trace norm `‖U_n^R‖_1` is nondecreasing and the distance
//! `D_n` nonincreasing; [`iterate`] counts any violation of these so callers
//! can treat them as hard failures.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{
    entangling_power_from_gaps, max_op_entanglement, reshuffled_gap, tsallis_from_spectrum,
    GateLabel, SchmidtSpectrum, TsallisValue, DEFAULT_CLASS_TOL,
};
use crate::tensor::{
    is_finite, partial_transpose_unchecked, unitarity_defect, BipartiteUnitary,
    CMatrix,
};

/// Singular values at or below this fraction of the largest one make the
/// polar factor non-unique.
const GAUGE_DEGENERACY_REL: f64 = 1e-12;

/// Tolerance applied when re-validating a projected operator.
const PROJECTION_UNITARITY_TOL: f64 = 1e-12;

/// Result of projecting a square matrix onto the unitary group.
#[derive(Clone, Debug)]
pub struct Projection {
    pub unitary: CMatrix,
    /// Descending.
    pub singular_values: Vec<f64>,
    /// `‖M − V‖²_HS = Σ (σ_i − 1)²`.
    pub distance_sq: f64,
    /// At least one singular value vanished, so the minimizer is not unique.
    pub gauge_degenerate: bool,
}

impl Projection {
    pub fn trace_norm(&self) -> f64 {
        self.singular_values.iter().sum()
    }
}

/// Closest unitary to `m` in the Hilbert–Schmidt norm (and in every
/// unitarily invariant norm).
pub fn nearest_unitary(m: &CMatrix) -> Result<Projection> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a nonempty square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::Precondition("matrix has non-finite entries".into()));
    }
    let svd = m.clone().svd(true, true);
    let (Some(p), Some(q_adj)) = (svd.u, svd.v_t) else {
        unreachable!("both factors were requested");
    };
    let unitary = p * q_adj;
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let distance_sq = singular_values.iter().map(|s| (s - 1.0) * (s - 1.0)).sum();
    let smax = singular_values[0];
    let smin = *singular_values.last().unwrap();
    Ok(Projection {
        unitary,
        gauge_degenerate: smin <= GAUGE_DEGENERACY_REL * smax,
        singular_values,
        distance_sq,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapKind {
    /// Realign, then project.
    #[serde(rename = "MR")]
    Realign,
    /// Partial transpose, then project.
    #[serde(rename = "MT")]
    PartialTranspose,
    /// Realign and partial transpose, then a single projection.
    #[serde(rename = "MTR")]
    TransposeRealign,
    /// `M_T ∘ M_R`: two projections per step.
    #[serde(rename = "MRT")]
    Alternating,
}

impl MapKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MapKind::Realign => "MR",
            MapKind::PartialTranspose => "MT",
            MapKind::TransposeRealign => "MTR",
            MapKind::Alternating => "MRT",
        }
    }

    /// The gap driven to zero by this map: `E` for `M_R`, `E(US)` for
    /// `M_T`, their sum for the combined maps (proportional to the
    /// entangling-power gap).
    pub fn progress_gap(&self, gap_u: f64, gap_us: f64) -> f64 {
        match self {
            MapKind::Realign => gap_u,
            MapKind::PartialTranspose => gap_us,
            MapKind::TransposeRealign | MapKind::Alternating => gap_u + gap_us,
        }
    }

    /// Reshuffled matrix that gets projected in a single-stage map.
    fn reshuffle(&self, u: &BipartiteUnitary) -> CMatrix {
        let d = u.d();
        match self {
            MapKind::Realign => u.realigned(),
            MapKind::PartialTranspose => u.partial_transposed(),
            MapKind::TransposeRealign => partial_transpose_unchecked(&u.realigned(), d),
            MapKind::Alternating => unreachable!("two-stage map"),
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "").as_str() {
            "MR" => Ok(MapKind::Realign),
            "MT" => Ok(MapKind::PartialTranspose),
            "MTR" => Ok(MapKind::TransposeRealign),
            "MRT" | "MRTALTERNATING" => Ok(MapKind::Alternating),
            _ => Err(Error::Parse(format!("unknown map `{s}` (expected MR, MT, MTR or MRT)"))),
        }
    }
}

/// One application of a map.
#[derive(Clone, Debug)]
pub struct MapStep {
    pub next: BipartiteUnitary,
    /// Trace norm of the matrix handed to the (last) projection.
    pub pre_trace_norm: f64,
    /// Squared distance from that matrix to its nearest unitary.
    pub distance_sq: f64,
    /// Singular values of the pre-projection matrix, descending. For `M_R`
    /// these square to the Schmidt spectrum of the input.
    pub singular_values: Vec<f64>,
    pub gauge_degenerate: bool,
}

fn project_to_gate(d: usize, m: &CMatrix) -> Result<(BipartiteUnitary, Projection)> {
    let proj = nearest_unitary(m)?;
    let defect = unitarity_defect(&proj.unitary);
    if !(defect <= PROJECTION_UNITARITY_TOL * (d * d) as f64) {
        return Err(Error::NotUnitary {
            defect,
            tol: PROJECTION_UNITARITY_TOL * (d * d) as f64,
        });
    }
    let gate = BipartiteUnitary::from_trusted(d, proj.unitary.clone());
    Ok((gate, proj))
}

pub fn apply_map(u: &BipartiteUnitary, kind: MapKind) -> Result<MapStep> {
    let d = u.d();
    match kind {
        MapKind::Alternating => {
            let first = apply_map(u, MapKind::Realign)?;
            let mut second = apply_map(&first.next, MapKind::PartialTranspose)?;
            second.gauge_degenerate |= first.gauge_degenerate;
            Ok(second)
        }
        single => {
            let (next, proj) = project_to_gate(d, &single.reshuffle(u))?;
            Ok(MapStep {
                next,
                pre_trace_norm: proj.trace_norm(),
                distance_sq: proj.distance_sq,
                gauge_degenerate: proj.gauge_degenerate,
                singular_values: proj.singular_values,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIter,
    Stalled,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Converged => "converged",
            StopReason::MaxIter => "max_iter",
            StopReason::Stalled => "stalled",
        })
    }
}

/// Driver settings for [`iterate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateOptions {
    pub max_iter: usize,
    /// Stop once the map's progress gap falls below this.
    pub eps_gap: f64,
    pub record_every: usize,
    /// Extra steps to record regardless of `record_every`.
    #[serde(default)]
    pub record_at: Vec<usize>,
    pub class_tol: f64,
    /// Stop as `stalled` when the progress gap has not improved by a
    /// relative `stall_rel` within this many steps. `None` disables it.
    pub stall_window: Option<usize>,
    pub stall_rel: f64,
    /// Record these Tsallis exponents at every recorded step.
    pub tsallis_qs: Vec<f64>,
    /// Keep iterating to `max_iter` after the gap drops below `eps_gap`.
    pub run_full: bool,
}

impl IterateOptions {
    pub fn new(max_iter: usize, eps_gap: f64) -> Self {
        Self {
            max_iter,
            eps_gap,
            record_every: 1,
            record_at: Vec::new(),
            class_tol: DEFAULT_CLASS_TOL,
            stall_window: None,
            stall_rel: 1e-9,
            tsallis_qs: Vec::new(),
            run_full: false,
        }
    }

    /// 100 steps for `d ≤ 3`, 2000 beyond.
    pub fn default_for(d: usize) -> Self {
        Self::new(default_max_iter(d), 1e-12)
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn record_at(mut self, steps: &[usize]) -> Self {
        self.record_at = steps.to_vec();
        self
    }

    pub fn class_tol(mut self, tol: f64) -> Self {
        self.class_tol = tol;
        self
    }

    pub fn stall_window(mut self, window: Option<usize>) -> Self {
        self.stall_window = window;
        self
    }

    pub fn tsallis(mut self, qs: &[f64]) -> Self {
        self.tsallis_qs = qs.to_vec();
        self
    }

    pub fn run_full(mut self, yes: bool) -> Self {
        self.run_full = yes;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter < 1 {
            return Err(Error::Parameter("max_iter must be at least 1".into()));
        }
        if !(self.eps_gap > 0.0) {
            return Err(Error::Parameter(format!("eps_gap must be positive, got {}", self.eps_gap)));
        }
        if self.record_every < 1 {
            return Err(Error::Parameter("record_every must be at least 1".into()));
        }
        if !(self.class_tol > 0.0) {
            return Err(Error::Parameter("class tolerance must be positive".into()));
        }
        for &q in &self.tsallis_qs {
            if !(q > 0.0) || q == 1.0 {
                return Err(Error::Parameter(format!("invalid Tsallis exponent {q}")));
            }
        }
        Ok(())
    }
}

pub fn default_max_iter(d: usize) -> usize {
    if d <= 3 {
        100
    } else {
        2000
    }
}

/// Measures of `U_n` plus the projection taking it to `U_{n+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub n: usize,
    #[serde(rename = "E_U")]
    pub e_u: f64,
    #[serde(rename = "E_US")]
    pub e_us: f64,
    pub ep: f64,
    /// `‖U_n^R‖_1`.
    pub trace_norm: f64,
    /// `D_n`, distance from the pre-projection matrix to `U_{n+1}`.
    #[serde(rename = "D_n")]
    pub d_n: f64,
    /// Trace norm of the pre-projection matrix (equals `trace_norm` for
    /// `M_R`).
    pub pre_trace_norm: f64,
    pub gap_u: f64,
    pub gap_us: f64,
    pub class: GateLabel,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tsallis: Vec<TsallisValue>,
}

impl StepRecord {
    pub fn d_n_sq(&self) -> f64 {
        self.d_n * self.d_n
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IterationTrace {
    pub d: usize,
    pub map: MapKind,
    pub steps: Vec<StepRecord>,
    #[serde(skip)]
    pub final_operator: BipartiteUnitary,
    pub stop_reason: StopReason,
    /// Number of map applications performed.
    pub iterations: usize,
    pub gauge_degenerate: bool,
    /// `M_R` only: steps where `‖U^R‖_1` dropped by more than `1e-9`, or
    /// `D_n²` grew by more than `1e-9`.
    pub monotonicity_violations: usize,
}

impl IterationTrace {
    pub fn last(&self) -> &StepRecord {
        self.steps.last().expect("a trace always records its final step")
    }

    pub fn progress_gaps(&self) -> Vec<(usize, f64)> {
        self.steps
            .iter()
            .map(|s| (s.n, self.map.progress_gap(s.gap_u, s.gap_us)))
            .collect()
    }
}

/// Slack allowed on the monotone quantities of `M_R`.
pub const MONOTONICITY_SLACK: f64 = 1e-9;

/// Iterates `kind` from `u0`, recording every `record_every`-th step and the
/// final one.
pub fn iterate(u0: &BipartiteUnitary, kind: MapKind, opts: &IterateOptions) -> Result<IterationTrace> {
    opts.validate()?;
    let d = u0.d();
    let e_max = max_op_entanglement(d);
    let mut u = u0.clone();
    let mut steps = Vec::new();
    let mut gauge_degenerate = false;
    let mut violations = 0usize;
    let mut prev: Option<(f64, f64)> = None;
    let mut best_gap = f64::INFINITY;
    let mut best_at = 0usize;

    for n in 0..=opts.max_iter {
        let step = apply_map(&u, kind)?;
        gauge_degenerate |= step.gauge_degenerate;

        let realigned = u.realigned();
        let gap_u = reshuffled_gap(&realigned, d);
        let gap_us = reshuffled_gap(&u.partial_transposed(), d);
        let gap = kind.progress_gap(gap_u, gap_us);

        if kind == MapKind::Realign {
            let cur = (step.pre_trace_norm, step.distance_sq);
            if let Some((tn, dsq)) = prev {
                if cur.0 < tn - MONOTONICITY_SLACK || cur.1 > dsq + MONOTONICITY_SLACK {
                    violations += 1;
                }
            }
            prev = Some(cur);
        }

        let stop = if gap < opts.eps_gap && (!opts.run_full || n == opts.max_iter) {
            Some(StopReason::Converged)
        } else if n == opts.max_iter {
            Some(StopReason::MaxIter)
        } else {
            if gap < best_gap * (1.0 - opts.stall_rel) {
                best_gap = gap;
                best_at = n;
            }
            match opts.stall_window {
                Some(w) if n >= best_at + w => Some(StopReason::Stalled),
                _ => None,
            }
        };

        if n % opts.record_every == 0 || stop.is_some() || opts.record_at.contains(&n) {
            let (trace_norm, spectrum_sv) = if kind == MapKind::Realign {
                (step.pre_trace_norm, step.singular_values.clone())
            } else {
                let mut sv: Vec<f64> = realigned.singular_values().iter().copied().collect();
                sv.sort_by(|a, b| b.total_cmp(a));
                (sv.iter().sum(), sv)
            };
            let tsallis = if opts.tsallis_qs.is_empty() {
                Vec::new()
            } else {
                let spectrum = SchmidtSpectrum {
                    d,
                    values: spectrum_sv.iter().map(|s| s * s).collect(),
                };
                opts.tsallis_qs
                    .iter()
                    .map(|&q| Ok(TsallisValue { q, value: tsallis_from_spectrum(&spectrum, q)? }))
                    .collect::<Result<Vec<_>>>()?
            };
            steps.push(StepRecord {
                n,
                e_u: e_max - gap_u,
                e_us: e_max - gap_us,
                ep: entangling_power_from_gaps(d, gap_u, gap_us),
                trace_norm,
                d_n: step.distance_sq.max(0.0).sqrt(),
                pre_trace_norm: step.pre_trace_norm,
                gap_u,
                gap_us,
                class: GateLabel::from_gaps(gap_u, gap_us, opts.class_tol),
                tsallis,
            });
        }

        if let Some(stop_reason) = stop {
            return Ok(IterationTrace {
                d,
                map: kind,
                steps,
                final_operator: u,
                stop_reason,
                iterations: n,
                gauge_degenerate,
                monotonicity_violations: violations,
            });
        }
        u = step.next;
    }
    unreachable!("the loop always stops at max_iter")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    Exponential,
    PowerLaw,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    /// Decay rate (exponential) or exponent (power law), positive for decay.
    pub rate: f64,
    pub intercept: f64,
    pub rss: f64,
    pub r_squared: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    /// `α` of the preferred model.
    pub rate_or_exponent: f64,
    /// `R²` of the preferred model.
    pub goodness: f64,
    pub exponential: LineFit,
    pub power_law: LineFit,
    pub points: usize,
}

/// Gaps below this are treated as numerical zero and left out of fits.
pub const FIT_GAP_FLOOR: f64 = 1e-14;

fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    LineFit {
        rate: -slope,
        intercept,
        rss,
        r_squared,
    }
}

/// Fits `log Δ_n` against `n` (exponential) and `log n` (power law) and
/// keeps the model with the smaller residual sum of squares.
pub fn fit_decay_series(points: &[(usize, f64)]) -> Result<DecayFit> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|(n, gap)| *n >= 1 && *gap >= FIT_GAP_FLOOR && gap.is_finite())
        .map(|&(n, gap)| (n as f64, gap.ln()))
        .collect();
    if usable.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} usable points, need at least 10",
            usable.len()
        )));
    }
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    let ns: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let logs: Vec<f64> = ns.iter().map(|n| n.ln()).collect();
    let exponential = least_squares(&ns, &ys);
    let power_law = least_squares(&logs, &ys);
    let (model, best) = if exponential.rss <= power_law.rss {
        (DecayModel::Exponential, exponential)
    } else {
        (DecayModel::PowerLaw, power_law)
    };
    Ok(DecayFit {
        model,
        rate_or_exponent: best.rate,
        goodness: best.r_squared,
        exponential,
        power_law,
        points: usable.len(),
    })
}

/// Decay fit of the trace's progress gap over recorded steps with
/// `n_min ≤ n ≤ n_max`.
pub fn fit_decay_window(trace: &IterationTrace, n_min: usize, n_max: usize) -> Result<DecayFit> {
    let points: Vec<(usize, f64)> = trace
        .progress_gaps()
        .into_iter()
        .filter(|(n, _)| *n >= n_min && *n <= n_max)
        .collect();
    if points.len() < 20 {
        return Err(Error::InsufficientData(format!(
            "{} recorded steps in window, need at least 20",
            points.len()
        )));
    }
    fit_decay_series(&points)
}

pub fn fit_decay(trace: &IterationTrace) -> Result<DecayFit> {
    fit_decay_window(trace, 0, usize::MAX)
}

/// Counts recorded steps where a tracked Tsallis entropy decreased by more
/// than `slack`. Used to probe the majorization conjecture; a nonzero count
/// is reported, not treated as an error.
pub fn tsallis_decreases(trace: &IterationTrace, slack: f64) -> Vec<(f64, usize)> {
    let Some(first) = trace.steps.first() else {
        return Vec::new();
    };
    first
        .tsallis
        .iter()
        .enumerate()
        .map(|(k, tv)| {
            let count = trace
                .steps
                .windows(2)
                .filter(|w| w[1].tsallis[k].value < w[0].tsallis[k].value - slack)
                .count();
            (tv.q, count)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{op_entanglement, trace_norm_realigned};
    use crate::sampling::{cue_sample, RngSeed};
    use crate::tensor::{phase_insensitive_distance, swap_gate, C64};

    fn random_gate(d: usize, stream: u64) -> BipartiteUnitary {
        BipartiteUnitary::new(cue_sample(d * d, RngSeed::new(17, stream))).unwrap()
    }

    #[test]
    fn projection_fixes_unitaries_and_scalings() {
        let u = cue_sample(9, RngSeed::new(1, 1));
        let p = nearest_unitary(&u).unwrap();
        assert!((&p.unitary - &u).norm() < 1e-12);
        assert!(p.distance_sq < 1e-24);
        let p2 = nearest_unitary(&(&u * C64::from(2.0))).unwrap();
        assert!((&p2.unitary - &u).norm() < 1e-12);
        assert!((p2.distance_sq - 9.0).abs() < 1e-10);
    }

    #[test]
    fn projection_distance_matches_trace_norm_identity() {
        for d in 2..=4 {
            let u = random_gate(d, d as u64);
            let r = u.realigned();
            let p = nearest_unitary(&r).unwrap();
            let direct = (&r - &p.unitary).norm_squared();
            let dd = (d * d) as f64;
            assert!((direct - p.distance_sq).abs() < 1e-10);
            assert!((p.distance_sq - (2.0 * dd - 2.0 * trace_norm_realigned(&u))).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_flags_singular_inputs() {
        let mut m = CMatrix::identity(4, 4);
        m[(3, 3)] = C64::new(0.0, 0.0);
        let p = nearest_unitary(&m).unwrap();
        assert!(p.gauge_degenerate);
        assert!(unitarity_defect(&p.unitary) < 1e-12);
        assert!(nearest_unitary(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn dual_gates_are_fixed_points_of_the_square() {
        let s = swap_gate(3).unwrap();
        let once = apply_map(&s, MapKind::Realign).unwrap();
        let twice = apply_map(&once.next, MapKind::Realign).unwrap();
        assert!(phase_insensitive_distance(&twice.next, &s) < 1e-10);
        assert!(once.distance_sq < 1e-24);
    }

    #[test]
    fn single_step_increases_trace_norm() {
        for d in 2..=5 {
            for stream in 0..4 {
                let u = random_gate(d, 100 + stream);
                let next = apply_map(&u, MapKind::Realign).unwrap().next;
                assert!(trace_norm_realigned(&next) >= trace_norm_realigned(&u) - 1e-9);
            }
        }
    }

    #[test]
    fn swap_trajectory_is_constant() {
        let s = swap_gate(2).unwrap();
        let tr = iterate(&s, MapKind::Realign, &IterateOptions::new(10, 1e-8)).unwrap();
        assert_eq!(tr.stop_reason, StopReason::Converged);
        assert_eq!(tr.iterations, 0);

        let opts = IterateOptions::new(10, 1e-8).run_full(true);
        let tr = iterate(&s, MapKind::Realign, &opts).unwrap();
        assert_eq!(tr.steps.len(), 11);
        assert!(tr.steps.iter().all(|st| st.d_n < 1e-12));
        assert!(tr.steps.iter().all(|st| (st.e_u - 0.75).abs() < 1e-14));
        assert_eq!(tr.stop_reason, StopReason::Converged);
        assert!(phase_insensitive_distance(&tr.final_operator, &s) < 1e-12);
    }

    #[test]
    fn qubit_trajectory_converges() {
        let u = random_gate(2, 5);
        let tr = iterate(&u, MapKind::Realign, &IterateOptions::new(50, 1e-8)).unwrap();
        assert_eq!(tr.stop_reason, StopReason::Converged);
        assert_eq!(tr.monotonicity_violations, 0);
        assert!(tr.last().e_u >= 0.75 - 1e-8);
        assert!((op_entanglement(&tr.final_operator) - tr.last().e_u).abs() < 1e-12);
        for st in &tr.steps {
            assert!((st.d_n_sq() - (8.0 - 2.0 * st.trace_norm)).abs() < 1e-9);
        }
    }

    #[test]
    fn record_every_keeps_final_step() {
        let u = random_gate(3, 2);
        let opts = IterateOptions::new(23, 1e-300).record_every(5);
        let tr = iterate(&u, MapKind::TransposeRealign, &opts).unwrap();
        let ns: Vec<usize> = tr.steps.iter().map(|s| s.n).collect();
        assert_eq!(ns, vec![0, 5, 10, 15, 20, 23]);
        assert_eq!(tr.iterations, 23);
    }

    #[test]
    fn invalid_options() {
        let u = random_gate(2, 0);
        assert!(iterate(&u, MapKind::Realign, &IterateOptions::new(0, 1e-8)).is_err());
        assert!(iterate(&u, MapKind::Realign, &IterateOptions::new(5, 0.0)).is_err());
        assert!(iterate(&u, MapKind::Realign, &IterateOptions::new(5, 1e-8).record_every(0)).is_err());
    }

    #[test]
    fn map_names_round_trip() {
        for k in [
            MapKind::Realign,
            MapKind::PartialTranspose,
            MapKind::TransposeRealign,
            MapKind::Alternating,
        ] {
            assert_eq!(k.as_str().parse::<MapKind>().unwrap(), k);
        }
        assert_eq!("M_TR".parse::<MapKind>().unwrap(), MapKind::TransposeRealign);
        assert!("MX".parse::<MapKind>().is_err());
    }

    #[test]
    fn synthetic_decays_are_identified() {
        let exp: Vec<(usize, f64)> = (1..60).map(|n| (n, (-0.3 * n as f64).exp())).collect();
        let fit = fit_decay_series(&exp).unwrap();
        assert_eq!(fit.model, DecayModel::Exponential);
        assert!((fit.rate_or_exponent - 0.3).abs() < 1e-6);

        let pow: Vec<(usize, f64)> = (1..60).map(|n| (n, (n as f64).powi(-2))).collect();
        let fit = fit_decay_series(&pow).unwrap();
        assert_eq!(fit.model, DecayModel::PowerLaw);
        assert!((fit.rate_or_exponent - 2.0).abs() < 1e-6);
    }

    #[test]
    fn decay_fit_needs_usable_points() {
        let tiny: Vec<(usize, f64)> = (1..30).map(|n| (n, if n < 5 { 0.1 } else { 1e-16 })).collect();
        assert!(matches!(fit_decay_series(&tiny), Err(Error::InsufficientData(_))));
    }
}
