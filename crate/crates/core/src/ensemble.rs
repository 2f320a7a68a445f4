//! Batch runs of a map over many CUE seeds.
//!
//! Trajectory `k` starts from `cue_sample(d², base_seed.with_stream(base + k))`
//! and is independent of every other trajectory, so runs are reproducible
//! under any worker count: results are collected in seed order and all
//! aggregation happens afterwards on one thread.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::maps::{fit_decay_window, iterate, DecayFit, DecayModel, IterateOptions, MapKind, StopReason};
use crate::measures::{max_entangling_power, max_op_entanglement, measure, GateClass, GateLabel, MeasureRecord, DEFAULT_CLASS_TOL};
use crate::sampling::{cue_sample, RngSeed};
use crate::tensor::BipartiteUnitary;

/// Largest local dimension run without `override_dim_guard`.
pub const MAX_GUARDED_DIM: usize = 7;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "DUFORGE_THREADS";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleConfig {
    pub d: usize,
    pub n_seeds: usize,
    pub map: MapKind,
    pub n_iter: usize,
    pub record_every: usize,
    pub class_tol: f64,
    pub histogram_bins: usize,
    pub base_seed: RngSeed,
    /// Early-stop threshold on the map's progress gap.
    pub eps: f64,
    /// Steps at which E_U and e_p histograms are taken. Empty means the
    /// defaults from [`default_checkpoints`].
    pub checkpoints: Vec<usize>,
    pub stall_window: Option<usize>,
    /// Window `(n_min, n_max)` for per-seed decay fits. `None` fits the
    /// whole recorded trace.
    pub fit_window: Option<(usize, usize)>,
    /// Keep the final operators classified `two_unitary`.
    pub keep_two_unitaries: bool,
    pub override_dim_guard: bool,
    /// Worker cap; falls back to `DUFORGE_THREADS`, then rayon's default.
    pub threads: Option<usize>,
}

impl EnsembleConfig {
    pub fn new(d: usize, n_seeds: usize, map: MapKind, n_iter: usize) -> Self {
        Self {
            d,
            n_seeds,
            map,
            n_iter,
            record_every: 1,
            class_tol: DEFAULT_CLASS_TOL,
            histogram_bins: 30,
            base_seed: RngSeed::new(1, 0),
            eps: 1e-12,
            checkpoints: Vec::new(),
            stall_window: None,
            fit_window: None,
            keep_two_unitaries: false,
            override_dim_guard: false,
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Dimension(format!("local dimension must be at least 2, got {}", self.d)));
        }
        if self.d > MAX_GUARDED_DIM && !self.override_dim_guard {
            return Err(Error::ResourceGuard(format!(
                "d = {} exceeds {MAX_GUARDED_DIM}; pass the dimension override to run it anyway",
                self.d
            )));
        }
        for (name, v) in [
            ("n_seeds", self.n_seeds),
            ("n_iter", self.n_iter),
            ("record_every", self.record_every),
            ("histogram_bins", self.histogram_bins),
        ] {
            if v == 0 {
                return Err(Error::Parameter(format!("{name} must be positive")));
            }
        }
        if self.histogram_bins < 2 {
            return Err(Error::Parameter("histogram_bins must be at least 2".into()));
        }
        if !(self.class_tol > 0.0) {
            return Err(Error::Parameter("class_tol must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Parameter("eps must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Parameter("threads must be positive".into()));
        }
        Ok(())
    }

    pub fn effective_checkpoints(&self) -> Vec<usize> {
        let mut cps = if self.checkpoints.is_empty() {
            default_checkpoints(self.d, self.n_iter)
        } else {
            self.checkpoints.iter().map(|&c| c.min(self.n_iter)).collect()
        };
        cps.sort_unstable();
        cps.dedup();
        cps
    }

    /// Sets one field from its textual `key = value` form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::Parse(format!("bad value `{value}` for `{key}`")))
        }
        fn flag(key: &str, value: &str) -> Result<bool> {
            match value {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(Error::Parse(format!("bad boolean `{value}` for `{key}`"))),
            }
        }
        fn list(key: &str, value: &str) -> Result<Vec<usize>> {
            value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| num(key, s))
                .collect()
        }
        match key {
            "d" => self.d = num(key, value)?,
            "n_seeds" => self.n_seeds = num(key, value)?,
            "map" => self.map = value.parse()?,
            "n_iter" => self.n_iter = num(key, value)?,
            "record_every" => self.record_every = num(key, value)?,
            "class_tol" => self.class_tol = num(key, value)?,
            "histogram_bins" => self.histogram_bins = num(key, value)?,
            "seed" | "base_seed" => self.base_seed.seed = num(key, value)?,
            "stream" => self.base_seed.stream = num(key, value)?,
            "eps" => self.eps = num(key, value)?,
            "checkpoints" => self.checkpoints = list(key, value)?,
            "stall_window" => {
                self.stall_window = match value {
                    "none" | "" => None,
                    v => Some(num(key, v)?),
                }
            }
            "fit_window" => {
                let v = list(key, value)?;
                self.fit_window = match v.as_slice() {
                    [] => None,
                    [lo, hi] => Some((*lo, *hi)),
                    _ => return Err(Error::Parse(format!("`{key}` takes two integers, got `{value}`"))),
                };
            }
            "keep_two_unitaries" => self.keep_two_unitaries = flag(key, value)?,
            "override_dim_guard" => self.override_dim_guard = flag(key, value)?,
            "threads" => self.threads = Some(num(key, value)?),
            _ => return Err(Error::Parse(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a flat `key = value` document on top of `self`. Blank lines
    /// and `#` comments are skipped.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = Self::new(2, 1, MapKind::Realign, 100);
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    fn iterate_options(&self) -> IterateOptions {
        IterateOptions::new(self.n_iter, self.eps)
            .record_every(self.record_every)
            .record_at(&self.effective_checkpoints())
            .class_tol(self.class_tol)
            .stall_window(self.stall_window)
    }
}

/// `{0, 5, 10, 20}` for `d = 2`, `{0, 10, 30, 100}` for `d = 3`,
/// `{0, 30, 100, 1000}` beyond; clipped to `n_iter`, which is always
/// included.
pub fn default_checkpoints(d: usize, n_iter: usize) -> Vec<usize> {
    let base: &[usize] = match d {
        2 => &[0, 5, 10, 20],
        3 => &[0, 10, 30, 100],
        _ => &[0, 30, 100, 1000],
    };
    let mut cps: Vec<usize> = base.iter().copied().filter(|&c| c < n_iter).collect();
    cps.push(n_iter);
    cps
}

/// Binned density with explicit edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    pub density: Vec<f64>,
    /// Values that fell outside the range and are not binned.
    pub below: usize,
    pub above: usize,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// `∫ density`; 1 up to rounding.
    pub fn mass(&self) -> f64 {
        self.density
            .iter()
            .zip(self.edges.windows(2))
            .map(|(p, e)| p * (e[1] - e[0]))
            .sum()
    }

    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = i;
            }
        }
        best
    }

    pub fn mean(&self) -> f64 {
        let total: usize = self.counts.iter().sum();
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .map(|(&c, e)| c as f64 * 0.5 * (e[0] + e[1]))
            .sum::<f64>()
            / total as f64
    }

    /// Mass in bins whose lower edge is at or above `x`, plus values above
    /// the range.
    pub fn count_at_or_above(&self, x: f64) -> usize {
        self.counts
            .iter()
            .zip(self.edges.windows(2))
            .filter(|(_, e)| e[0] >= x)
            .map(|(&c, _)| c)
            .sum::<usize>()
            + self.above
    }
}

/// Relative slack for values that sit on a range edge up to rounding.
const EDGE_SLACK: f64 = 1e-12;

/// Normalized histogram of `values` over `range`, or over `[min, max]` of
/// the data when `range` is `None`. Values a hair outside the range (by at
/// most `1e-12` of its width) are clamped into the edge bins; anything
/// further out is counted in `below`/`above` and excluded from the density.
pub fn histogram(values: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if values.is_empty() {
        return Err(Error::InsufficientData("histogram of no values".into()));
    }
    if bins < 2 {
        return Err(Error::Parameter(format!("need at least 2 bins, got {bins}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("histogram values must be finite".into()));
    }
    let (mut lo, mut hi) = match range {
        Some((lo, hi)) => {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Parameter(format!("bad histogram range [{lo}, {hi}]")));
            }
            (lo, hi)
        }
        None => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| if i == bins { hi } else { lo + width * i as f64 }).collect();
    let slack = EDGE_SLACK * (hi - lo);
    let mut counts = vec![0usize; bins];
    let (mut below, mut above) = (0, 0);
    for &v in values {
        if v < lo - slack {
            below += 1;
        } else if v > hi + slack {
            above += 1;
        } else {
            let k = (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);
            counts[k] += 1;
        }
    }
    let inside: usize = counts.iter().sum();
    if inside == 0 {
        return Err(Error::InsufficientData(format!("no value falls inside [{lo}, {hi}]")));
    }
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, e)| c as f64 / (inside as f64 * (e[1] - e[0])))
        .collect();
    Ok(Histogram { edges, counts, density, below, above })
}

/// Measures of one trajectory at a checkpoint.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CheckpointValue {
    pub n: usize,
    #[serde(rename = "E_U")]
    pub e_u: f64,
    pub ep: f64,
    pub gap_u: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeedOutcome {
    pub index: usize,
    pub seed: RngSeed,
    #[serde(rename = "final")]
    pub final_measures: MeasureRecord,
    pub class: GateClass,
    pub stop_reason: StopReason,
    pub iterations: usize,
    pub monotonicity_violations: usize,
    pub gauge_degenerate: bool,
    pub checkpoints: Vec<CheckpointValue>,
    /// `None` when the trace is too short to fit.
    pub decay: Option<DecayFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckpointHistograms {
    pub n: usize,
    #[serde(rename = "E_U")]
    pub e_u: Histogram,
    pub ep: Histogram,
    /// Fraction of seeds with `E_max − E_U < 1e-3` at this step.
    pub near_max_fraction: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DecaySummary {
    pub fitted: usize,
    pub unfittable: usize,
    pub exponential: usize,
    pub power_law: usize,
    pub median_rate_exponential: Option<f64>,
    pub median_exponent_power_law: Option<f64>,
}

impl DecaySummary {
    pub fn preferred(&self) -> Option<DecayModel> {
        match self.exponential.cmp(&self.power_law) {
            std::cmp::Ordering::Greater => Some(DecayModel::Exponential),
            std::cmp::Ordering::Less => Some(DecayModel::PowerLaw),
            std::cmp::Ordering::Equal => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleReport {
    pub config: EnsembleConfig,
    pub per_seed: Vec<SeedOutcome>,
    pub histograms: Vec<CheckpointHistograms>,
    pub fractions: BTreeMap<GateLabel, f64>,
    pub stalled: usize,
    pub decay: DecaySummary,
    pub wall_time: f64,
    /// `(seed index, final operator)` for each 2-unitary hit, when requested.
    #[serde(skip)]
    pub two_unitaries: Vec<(usize, BipartiteUnitary)>,
}

impl EnsembleReport {
    pub fn fraction(&self, label: GateLabel) -> f64 {
        self.fractions.get(&label).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Columns `n,quantity,bin_lo,bin_hi,count,density`.
    pub fn histograms_csv(&self) -> String {
        let mut out = String::from("n,quantity,bin_lo,bin_hi,count,density\n");
        for cp in &self.histograms {
            for (name, h) in [("E_U", &cp.e_u), ("ep", &cp.ep)] {
                for (k, e) in h.edges.windows(2).enumerate() {
                    let _ = writeln!(out, "{},{name},{},{},{},{}", cp.n, e[0], e[1], h.counts[k], h.density[k]);
                }
            }
        }
        out
    }

    /// Columns `index,seed,stream,class,stop_reason,iterations,E_U,E_US,ep`.
    pub fn per_seed_csv(&self) -> String {
        let mut out = String::from("index,seed,stream,class,stop_reason,iterations,E_U,E_US,ep\n");
        for s in &self.per_seed {
            let m = &s.final_measures;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.index, s.seed.seed, s.seed.stream, s.class.label, s.stop_reason, s.iterations, m.e_u, m.e_us, m.ep
            );
        }
        out
    }
}

fn worker_count(cfg: &EnsembleConfig) -> Result<Option<usize>> {
    if let Some(t) = cfg.threads {
        return Ok(Some(t));
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::Parameter(format!("{THREADS_ENV} must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a pool sized from the config (or the environment).
fn in_pool<T: Send>(cfg: &EnsembleConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = worker_count(cfg)? {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Parameter(format!("cannot build thread pool: {e}")))?;
    Ok(pool.install(f))
}

fn run_seed(cfg: &EnsembleConfig, opts: &IterateOptions, index: usize) -> Result<(SeedOutcome, Option<BipartiteUnitary>)> {
    let seed = cfg.base_seed.with_stream(cfg.base_seed.stream + index as u64);
    let u0 = BipartiteUnitary::from_trusted(cfg.d, cue_sample(cfg.d * cfg.d, seed));
    run_from(cfg, opts, index, seed, &u0)
}

fn run_from(
    cfg: &EnsembleConfig,
    opts: &IterateOptions,
    index: usize,
    seed: RngSeed,
    u0: &BipartiteUnitary,
) -> Result<(SeedOutcome, Option<BipartiteUnitary>)> {
    let trace = iterate(u0, cfg.map, opts)?;
    let final_step = trace.last();
    // after an early stop the operator sits at its fixed point, so later
    // checkpoints take the final values
    let checkpoints = cfg
        .effective_checkpoints()
        .into_iter()
        .map(|c| {
            let s = trace.steps.iter().find(|s| s.n == c).unwrap_or(final_step);
            CheckpointValue { n: c, e_u: s.e_u, ep: s.ep, gap_u: s.gap_u }
        })
        .collect();
    let (lo, hi) = cfg.fit_window.unwrap_or((0, usize::MAX));
    let decay = fit_decay_window(&trace, lo, hi).ok();
    let final_measures = measure(&trace.final_operator);
    let class = final_measures.classify(cfg.class_tol);
    let keep = (cfg.keep_two_unitaries && class.label == GateLabel::TwoUnitary).then(|| trace.final_operator.clone());
    Ok((
        SeedOutcome {
            index,
            seed,
            final_measures,
            class,
            stop_reason: trace.stop_reason,
            iterations: trace.iterations,
            monotonicity_violations: trace.monotonicity_violations,
            gauge_degenerate: trace.gauge_degenerate,
            checkpoints,
            decay,
        },
        keep,
    ))
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    Some(if xs.len() % 2 == 1 { xs[m] } else { 0.5 * (xs[m - 1] + xs[m]) })
}

fn summarize_decay(per_seed: &[SeedOutcome]) -> DecaySummary {
    let fits: Vec<&DecayFit> = per_seed.iter().filter_map(|s| s.decay.as_ref()).collect();
    let pick = |model: DecayModel| -> Vec<f64> {
        fits.iter().filter(|f| f.model == model).map(|f| f.rate_or_exponent).collect()
    };
    let exp = pick(DecayModel::Exponential);
    let pow = pick(DecayModel::PowerLaw);
    DecaySummary {
        fitted: fits.len(),
        unfittable: per_seed.len() - fits.len(),
        exponential: exp.len(),
        power_law: pow.len(),
        median_rate_exponential: median(exp),
        median_exponent_power_law: median(pow),
    }
}

fn build_report(
    cfg: &EnsembleConfig,
    outcomes: Vec<(SeedOutcome, Option<BipartiteUnitary>)>,
    started: Instant,
) -> Result<EnsembleReport> {
    let mut per_seed = Vec::with_capacity(outcomes.len());
    let mut two_unitaries = Vec::new();
    for (outcome, kept) in outcomes {
        if let Some(u) = kept {
            two_unitaries.push((outcome.index, u));
        }
        per_seed.push(outcome);
    }

    if cfg.map == MapKind::Realign {
        let bad: Vec<usize> = per_seed
            .iter()
            .filter(|s| s.monotonicity_violations > 0)
            .map(|s| s.index)
            .collect();
        if !bad.is_empty() {
            return Err(Error::Invariant(format!(
                "trace norm decreased along the realignment map for seeds {bad:?}"
            )));
        }
    }

    let n = per_seed.len() as f64;
    let fractions: BTreeMap<GateLabel, f64> = GateLabel::ALL
        .iter()
        .map(|&l| (l, per_seed.iter().filter(|s| s.class.label == l).count() as f64 / n))
        .collect();

    let e_range = (0.0, max_op_entanglement(cfg.d));
    let ep_range = (0.0, max_entangling_power(cfg.d));
    let histograms = cfg
        .effective_checkpoints()
        .into_iter()
        .enumerate()
        .map(|(k, c)| {
            let e_u: Vec<f64> = per_seed.iter().map(|s| s.checkpoints[k].e_u).collect();
            let ep: Vec<f64> = per_seed.iter().map(|s| s.checkpoints[k].ep).collect();
            let near = per_seed.iter().filter(|s| s.checkpoints[k].gap_u < 1e-3).count() as f64 / n;
            Ok(CheckpointHistograms {
                n: c,
                e_u: histogram(&e_u, cfg.histogram_bins, Some(e_range))?,
                ep: histogram(&ep, cfg.histogram_bins, Some(ep_range))?,
                near_max_fraction: near,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EnsembleReport {
        config: cfg.clone(),
        stalled: per_seed.iter().filter(|s| s.stop_reason == StopReason::Stalled).count(),
        decay: summarize_decay(&per_seed),
        per_seed,
        histograms,
        fractions,
        wall_time: started.elapsed().as_secs_f64(),
        two_unitaries,
    })
}

pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleReport> {
    cfg.validate()?;
    let started = Instant::now();
    let opts = cfg.iterate_options();
    let outcomes = in_pool(cfg, || {
        (0..cfg.n_seeds)
            .into_par_iter()
            .map(|k| run_seed(cfg, &opts, k))
            .collect::<Result<Vec<_>>>()
    })??;
    build_report(cfg, outcomes, started)
}

/// Like [`run_ensemble`] but from caller-supplied starting operators;
/// `n_seeds` is taken from `seeds.len()` and the recorded seed is the
/// config's base seed.
pub fn run_ensemble_from(cfg: &EnsembleConfig, seeds: &[BipartiteUnitary]) -> Result<EnsembleReport> {
    let mut cfg = cfg.clone();
    cfg.n_seeds = seeds.len();
    cfg.validate()?;
    if let Some(bad) = seeds.iter().find(|u| u.d() != cfg.d) {
        return Err(Error::Dimension(format!("seed has d = {}, config has d = {}", bad.d(), cfg.d)));
    }
    let started = Instant::now();
    let opts = cfg.iterate_options();
    let outcomes = in_pool(&cfg, || {
        seeds
            .par_iter()
            .enumerate()
            .map(|(k, u)| run_from(&cfg, &opts, k, cfg.base_seed, u))
            .collect::<Result<Vec<_>>>()
    })??;
    build_report(&cfg, outcomes, started)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsymptoteReport {
    /// Median of `e_p / e_p^max` over seeds.
    pub median_ratio: f64,
    pub ratios: Vec<f64>,
    pub two_unitary: usize,
    pub histogram: Histogram,
    /// Local maxima of the 10-bin ratio histogram after a 3-bin moving
    /// average. A single-peaked distribution gives 1.
    pub peaks: usize,
}

const ASYMPTOTE_MIN_ITER: usize = 1000;

fn count_peaks(counts: &[usize]) -> usize {
    let n = counts.len();
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            counts[lo..=hi].iter().sum::<usize>() as f64 / (hi - lo + 1) as f64
        })
        .collect();
    let mut peaks = 0;
    let mut i = 0;
    while i < n {
        // treat plateaus as one point
        let mut j = i;
        while j + 1 < n && smooth[j + 1] == smooth[i] {
            j += 1;
        }
        let left_lower = i == 0 || smooth[i - 1] < smooth[i];
        let right_lower = j == n - 1 || smooth[j + 1] < smooth[i];
        if left_lower && right_lower && smooth[i] > 0.0 {
            peaks += 1;
        }
        i = j + 1;
    }
    peaks
}

fn asymptote_from_report(report: &EnsembleReport) -> Result<AsymptoteReport> {
    let ratios: Vec<f64> = report.per_seed.iter().map(|s| s.final_measures.ep_ratio()).collect();
    let histogram = histogram(&ratios, 10, None)?;
    Ok(AsymptoteReport {
        median_ratio: median(ratios.clone()).expect("at least one seed"),
        peaks: count_peaks(&histogram.counts),
        two_unitary: report
            .per_seed
            .iter()
            .filter(|s| s.class.label == GateLabel::TwoUnitary)
            .count(),
        ratios,
        histogram,
    })
}

fn asymptote_config(n_seeds: usize, n_iter: usize, base_seed: RngSeed) -> Result<EnsembleConfig> {
    if n_iter < ASYMPTOTE_MIN_ITER {
        return Err(Error::Parameter(format!(
            "asymptote check needs at least {ASYMPTOTE_MIN_ITER} iterations, got {n_iter}"
        )));
    }
    let mut cfg = EnsembleConfig::new(5, n_seeds, MapKind::TransposeRealign, n_iter);
    cfg.base_seed = base_seed;
    cfg.record_every = n_iter;
    cfg.checkpoints = vec![n_iter];
    Ok(cfg)
}

/// Median `e_p / e_p^max` for `d = 5` CUE seeds after `n_iter` steps of
/// `M_TR`.
pub fn d5_asymptote_check(n_seeds: usize, n_iter: usize, base_seed: RngSeed) -> Result<AsymptoteReport> {
    let cfg = asymptote_config(n_seeds, n_iter, base_seed)?;
    asymptote_from_report(&run_ensemble(&cfg)?)
}

/// [`d5_asymptote_check`] from given `d = 5` starting operators.
pub fn d5_asymptote_from(seeds: &[BipartiteUnitary], n_iter: usize) -> Result<AsymptoteReport> {
    let cfg = asymptote_config(seeds.len(), n_iter, RngSeed::default())?;
    asymptote_from_report(&run_ensemble_from(&cfg, seeds)?)
}
