//! Seeded, parallel Monte-Carlo experiment runner.
//!
//! An experiment draws `trials` independent training sets, builds a filter
//! on each, records the SNR loss against the scenario's true covariance,
//! and tests the empirical distribution against target laws. Trial `i`
//! always uses RNG stream id `i`, so results are independent of the worker
//! count, and partial runs over disjoint trial ranges merge into exactly
//! the single-run result.

use std::fmt;
use std::io::Write;
use std::ops::Range;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use snrloss_core::dist::{gram, sample_iid_cgauss, RngStream};
use snrloss_core::filters::{
    w_diagonal_loading, w_eigencanceler, w_marzetta, w_optimal, w_partial, w_pchol, w_smi, w_wnmf,
    FilterError, Transform, Weight,
};
use snrloss_core::law::{
    cdf_rho, derive_general_params, pdf_rho, sample_rho, snr_loss, snr_opt, EmpiricalCdf, LawError,
    LossLaw, LossLawKind,
};
use snrloss_core::scenario::{draw_training_set, Scenario, ScenarioError, ScenarioKind};
use snrloss_core::Complex64;

/// Losses kept verbatim in the result digest; larger runs are thinned to a
/// deterministic stratified reservoir of this size.
pub const DIGEST_CAP: usize = 1_000_000;

/// Asymptotic 1% Kolmogorov-Smirnov constant.
pub const KS_CONST_1PCT: f64 = 1.63;

/// Stream id reserved for deterministic transform construction so it never
/// collides with per-trial stream ids.
const TRANSFORM_STREAM: u64 = u64::MAX;

/// Seed mixer separating the representation route from the simulation
/// route in [`compare_routes`].
const SEED_MIX: u64 = 0x9E37_79B9_7F4A_7C15;

// ── Errors ──────────────────────────────────────────────────────────────

#[derive(Debug)]
pub enum McError {
    /// Configuration violates an invariant; the message names it.
    Config(String),
    /// A trial failed; carries the trial index.
    Trial {
        index: usize,
        msg: String,
    },
    EmptySamples,
    Law(LawError),
    Io(std::io::Error),
    Json(serde_json::Error),
}

impl fmt::Display for McError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            McError::Config(msg) => write!(f, "invalid config: {msg}"),
            McError::Trial { index, msg } => write!(f, "trial {index} failed: {msg}"),
            McError::EmptySamples => write!(f, "empty sample set"),
            McError::Law(e) => write!(f, "law error: {e}"),
            McError::Io(e) => write!(f, "io error: {e}"),
            McError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for McError {}

impl From<LawError> for McError {
    fn from(e: LawError) -> Self {
        McError::Law(e)
    }
}

impl From<std::io::Error> for McError {
    fn from(e: std::io::Error) -> Self {
        McError::Io(e)
    }
}

impl From<serde_json::Error> for McError {
    fn from(e: serde_json::Error) -> Self {
        McError::Json(e)
    }
}

impl From<ScenarioError> for McError {
    fn from(e: ScenarioError) -> Self {
        McError::Config(e.to_string())
    }
}

// ── Configuration ───────────────────────────────────────────────────────

/// Filter selection with its parameters. `psi_seed`/`t_seed` make random
/// transforms part of the reproducible configuration.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    Optimal,
    Wnmf,
    Smi,
    Gsc { r: usize, psi_seed: u64 },
    GeneralTransform { r: usize, t_seed: u64 },
    Eigencanceler { r: usize },
    Pchol { r: usize },
    DiagonalLoading { mu: f64 },
    Marzetta { r: usize, l: usize },
}

impl FilterSpec {
    /// Smallest training size the filter can be built from.
    fn min_k(&self, n: usize) -> usize {
        match self {
            FilterSpec::Optimal | FilterSpec::Wnmf => 1,
            FilterSpec::Smi => n,
            FilterSpec::DiagonalLoading { mu } => {
                if *mu > 0.0 {
                    1
                } else {
                    n
                }
            }
            FilterSpec::Gsc { r, .. }
            | FilterSpec::GeneralTransform { r, .. }
            | FilterSpec::Marzetta { r, .. } => r + 1,
            FilterSpec::Eigencanceler { r } | FilterSpec::Pchol { r } => (*r).max(1),
        }
    }

    fn rank(&self) -> Option<usize> {
        match self {
            FilterSpec::Gsc { r, .. }
            | FilterSpec::GeneralTransform { r, .. }
            | FilterSpec::Eigencanceler { r }
            | FilterSpec::Pchol { r }
            | FilterSpec::Marzetta { r, .. } => Some(*r),
            _ => None,
        }
    }
}

fn default_bins() -> usize {
    100
}

fn default_moments() -> bool {
    true
}

/// One Monte-Carlo experiment, fully reproducible from this value alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub filter: FilterSpec,
    pub trials: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub seed: u64,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "default_moments")]
    pub moments: bool,
    #[serde(default)]
    pub ks_targets: Vec<LossLaw>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), McError> {
        self.scenario
            .validate()
            .map_err(|e| McError::Config(format!("scenario: {e}")))?;
        if self.trials < 100 {
            return Err(McError::Config(format!(
                "trials = {} is below the floor of 100",
                self.trials
            )));
        }
        if self.k == 0 {
            return Err(McError::Config("K must be at least 1".into()));
        }
        let n = self.scenario.dim();
        let floor = self.filter.min_k(n);
        if self.k < floor {
            return Err(McError::Config(format!(
                "K = {} below the minimum {} for filter {:?} at N = {}",
                self.k, floor, self.filter, n
            )));
        }
        if let Some(r) = self.filter.rank() {
            if r >= n {
                return Err(McError::Config(format!(
                    "transform rank R = {r} must be below N = {n}"
                )));
            }
        }
        if self.bins == 0 {
            return Err(McError::Config("bins must be positive".into()));
        }
        for law in &self.ks_targets {
            law.validate()
                .map_err(|e| McError::Config(format!("ks target: {e}")))?;
        }
        Ok(())
    }
}

// ── Results ─────────────────────────────────────────────────────────────

/// Equal-width histogram on `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Histogram {
    pub bins: usize,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub(crate) fn tally(bins: usize, losses: &[f64]) -> Self {
        let mut counts = vec![0u64; bins];
        for &x in losses {
            let idx = ((x * bins as f64) as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Histogram { bins, counts }
    }

    pub fn bin_edges(&self, idx: usize) -> (f64, f64) {
        let w = 1.0 / self.bins as f64;
        (idx as f64 * w, (idx + 1) as f64 * w)
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KsOutcome {
    pub statistic: f64,
    pub threshold_1pct: f64,
    pub pass: bool,
}

/// KS test of the sample digest against one target law.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct KsResult {
    pub target: LossLaw,
    /// True when the target itself is only an approximation (ec/pchol/dl)
    /// or its cdf is an empirical cache; pass/fail is then advisory.
    pub approximate: bool,
    #[serde(flatten)]
    pub outcome: KsOutcome,
}

/// Everything a finished experiment reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub version: String,
    /// Sorted losses; thinned to a stratified reservoir above
    /// [`DIGEST_CAP`].
    pub samples: Vec<f64>,
    pub reservoir: bool,
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub histogram: Histogram,
    pub ks_results: Vec<KsResult>,
    pub runtime_ms: u64,
}

// ── Trial execution ─────────────────────────────────────────────────────

/// Pieces shared by every trial: currently only the fixed transform, which
/// is drawn once from its own seed.
struct FilterCtx {
    transform: Option<Transform>,
}

/// The fixed transform a filter spec implies, drawn deterministically
/// from the spec's own seed; None for specs without one. Public so
/// callers can recover the exact transform an experiment used, e.g. to
/// compute its reachable energy fraction.
pub fn transform_for(spec: &FilterSpec, v: &[Complex64]) -> Result<Option<Transform>, McError> {
    let n = v.len();
    Ok(match spec {
        FilterSpec::Gsc { r, psi_seed } => {
            let mut rng = RngStream::new(*psi_seed, TRANSFORM_STREAM);
            let psi = sample_iid_cgauss(&mut rng, n - 1, *r);
            Some(
                Transform::gsc(v, &psi)
                    .map_err(|e| McError::Config(format!("gsc transform: {e}")))?,
            )
        }
        FilterSpec::GeneralTransform { r, t_seed } => {
            let mut rng = RngStream::new(*t_seed, TRANSFORM_STREAM);
            let t = sample_iid_cgauss(&mut rng, n, *r + 1);
            Some(
                Transform::general(t)
                    .map_err(|e| McError::Config(format!("general transform: {e}")))?,
            )
        }
        _ => None,
    })
}

fn build_ctx(config: &ExperimentConfig) -> Result<FilterCtx, McError> {
    Ok(FilterCtx {
        transform: transform_for(&config.filter, &config.scenario.v)?,
    })
}

fn filter_err(e: FilterError) -> String {
    format!("filter: {e}")
}

fn one_trial(config: &ExperimentConfig, ctx: &FilterCtx, trial: usize) -> Result<f64, String> {
    let sc = &config.scenario;
    let mut rng = RngStream::new(config.seed, trial as u64);
    let x = draw_training_set(&mut rng, sc, config.k).map_err(|e| format!("training: {e}"))?;
    let s_t = gram(&x);
    let w: Weight = match &config.filter {
        FilterSpec::Optimal => w_optimal(&sc.sigma, &sc.v).map_err(filter_err)?,
        FilterSpec::Wnmf => w_wnmf(&sc.v).map_err(filter_err)?,
        FilterSpec::Smi => w_smi(&s_t, &sc.v).map_err(filter_err)?,
        FilterSpec::Gsc { .. } | FilterSpec::GeneralTransform { .. } => {
            let t = ctx.transform.as_ref().expect("ctx built for this spec");
            w_partial(t, &s_t, &sc.v).map_err(filter_err)?
        }
        FilterSpec::Eigencanceler { r } => w_eigencanceler(&s_t, &sc.v, *r).map_err(filter_err)?,
        FilterSpec::Pchol { r } => w_pchol(&s_t, &sc.v, *r).map_err(filter_err)?,
        FilterSpec::DiagonalLoading { mu } => {
            w_diagonal_loading(&s_t, &sc.v, *mu, config.k).map_err(filter_err)?
        }
        // continues the per-trial stream after the training draw, so the
        // random mixers stay deterministic per trial
        FilterSpec::Marzetta { r, l } => {
            w_marzetta(&mut rng, &s_t, &sc.v, *r, *l).map_err(filter_err)?
        }
    };
    snr_loss(&w, &sc.v, &sc.sigma).map_err(|e| format!("loss: {e}"))
}

/// Runs the trials in `range` sequentially; building block for both the
/// parallel runner and external partial/merge use.
pub fn run_trial_range(
    config: &ExperimentConfig,
    range: Range<usize>,
) -> Result<Vec<f64>, McError> {
    let ctx = build_ctx(config)?;
    run_trial_range_with(config, &ctx, range)
}

fn run_trial_range_with(
    config: &ExperimentConfig,
    ctx: &FilterCtx,
    range: Range<usize>,
) -> Result<Vec<f64>, McError> {
    let mut out = Vec::with_capacity(range.len());
    for trial in range {
        let loss =
            one_trial(config, ctx, trial).map_err(|msg| McError::Trial { index: trial, msg })?;
        out.push(loss);
    }
    Ok(out)
}

/// Assembles losses from any union of disjoint trial ranges into the final
/// result. Order-insensitive: the digest is sorted and the histogram and
/// moments are additive.
pub fn assemble(
    config: &ExperimentConfig,
    mut losses: Vec<f64>,
    runtime_ms: u64,
) -> Result<ExperimentResult, McError> {
    if losses.len() != config.trials {
        return Err(McError::Config(format!(
            "assembled {} losses for {} trials",
            losses.len(),
            config.trials
        )));
    }
    losses.sort_unstable_by(f64::total_cmp);
    let m = losses.len();
    let (mean, variance) = if config.moments {
        let mean = losses.iter().sum::<f64>() / m as f64;
        let ss = losses.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
        (Some(mean), Some(ss / (m - 1) as f64))
    } else {
        (None, None)
    };
    let histogram = Histogram::tally(config.bins, &losses);
    let mut ks_results = Vec::with_capacity(config.ks_targets.len());
    for law in &config.ks_targets {
        let (outcome, empirical_ref) = ks_against_law(&losses, law)?;
        ks_results.push(KsResult {
            approximate: law.approximate() || empirical_ref,
            target: law.clone(),
            outcome,
        });
    }
    let reservoir = m > DIGEST_CAP;
    let samples = if reservoir {
        stratified_thin(&losses)
    } else {
        losses
    };
    Ok(ExperimentResult {
        config: config.clone(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        samples,
        reservoir,
        mean,
        variance,
        histogram,
        ks_results,
        runtime_ms,
    })
}

/// Deterministic stratified reservoir: one sample from the middle of each
/// of [`DIGEST_CAP`] equal strata of the sorted array.
fn stratified_thin(sorted: &[f64]) -> Vec<f64> {
    let stride = sorted.len().div_ceil(DIGEST_CAP);
    sorted
        .iter()
        .skip(stride / 2)
        .step_by(stride)
        .copied()
        .collect()
}

/// Runs the whole experiment on `threads` workers.
pub fn run_experiment(
    config: &ExperimentConfig,
    threads: usize,
) -> Result<ExperimentResult, McError> {
    config.validate()?;
    let started = Instant::now();
    let ctx = build_ctx(config)?;
    let workers = threads.max(1).min(config.trials);
    let chunk = config.trials.div_ceil(workers);
    let mut losses = vec![0.0f64; config.trials];
    let mut failure: Option<McError> = None;
    std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        let mut rest: &mut [f64] = &mut losses;
        let mut start = 0usize;
        let ctx = &ctx;
        while start < config.trials {
            let end = (start + chunk).min(config.trials);
            let (mine, tail) = rest.split_at_mut(end - start);
            rest = tail;
            handles.push(scope.spawn(move || {
                run_trial_range_with(config, ctx, start..end).map(|chunk_losses| {
                    mine.copy_from_slice(&chunk_losses);
                })
            }));
            start = end;
        }
        for handle in handles {
            if let Err(e) = handle.join().expect("worker panicked") {
                failure.get_or_insert(e);
            }
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let runtime_ms = started.elapsed().as_millis() as u64;
    assemble(config, losses, runtime_ms)
}

// ── KS testing ──────────────────────────────────────────────────────────

/// Whether `cdf_rho` has a closed form for the kind (the undernulled kind
/// falls back to an empirical cache; general/ger have no cdf at all).
fn has_closed_cdf(kind: LossLawKind) -> bool {
    !matches!(
        kind,
        LossLawKind::General | LossLawKind::Ger | LossLawKind::Undernulled
    )
}

/// Draws backing the empirical reference for representation-only kinds.
const EMPIRICAL_REF_DRAWS: usize = 200_000;
const EMPIRICAL_REF_SEED: u64 = 0x5eed_cdf0;

/// Reference distribution for a KS test, built once per target law.
/// Splits by evaluation strategy: direct `cdf_rho` where it is cheap,
/// incremental quadrature for the kinds whose cdf integrates the density
/// per call, and an empirical cache where no closed form exists.
enum RefCdf {
    Direct(LossLaw),
    Incremental(LossLaw),
    Empirical(EmpiricalCdf),
}

impl RefCdf {
    fn new(law: &LossLaw) -> Result<Self, McError> {
        law.validate()?;
        Ok(match law.kind {
            LossLawKind::Mvdr | LossLawKind::EcApprox | LossLawKind::DlApprox => {
                RefCdf::Direct(law.clone())
            }
            LossLawKind::Mpdr
            | LossLawKind::Student
            | LossLawKind::PaMvdr
            | LossLawKind::PaMpdr
            | LossLawKind::PcholApprox => RefCdf::Incremental(law.clone()),
            LossLawKind::General | LossLawKind::Ger | LossLawKind::Undernulled => {
                RefCdf::Empirical(EmpiricalCdf::build(
                    law,
                    EMPIRICAL_REF_DRAWS,
                    EMPIRICAL_REF_SEED,
                )?)
            }
        })
    }

    /// Reference-side draw count when the reference is itself empirical.
    fn empirical_len(&self) -> Option<usize> {
        match self {
            RefCdf::Empirical(cache) => Some(cache.len()),
            _ => None,
        }
    }

    /// Cdf at every sorted sample, in order.
    fn values_at(&self, sorted: &[f64]) -> Result<Vec<f64>, McError> {
        match self {
            RefCdf::Direct(law) => sorted.iter().map(|&x| clamped_cdf(law, x)).collect(),
            RefCdf::Incremental(law) => incremental_cdf(law, sorted),
            RefCdf::Empirical(cache) => Ok(sorted.iter().map(|&x| cache.eval(x)).collect()),
        }
    }
}

fn clamped_cdf(law: &LossLaw, x: f64) -> Result<f64, McError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= law.support_max() {
        return Ok(1.0);
    }
    Ok(cdf_rho(x, law)?)
}

/// Cdf at each sorted sample via one anchored pass: `cdf_rho` once at the
/// smallest sample, then Simpson panels over the gaps between consecutive
/// order statistics. The gaps are narrow, so fixed panels are exact to
/// well below KS resolution, and the whole pass costs one integration
/// instead of one per sample.
fn incremental_cdf(law: &LossLaw, sorted: &[f64]) -> Result<Vec<f64>, McError> {
    let support = law.support_max();
    let mut vals = Vec::with_capacity(sorted.len());
    let first = sorted[0].clamp(0.0, support);
    let mut acc = cdf_rho(first, law)?;
    vals.push(acc);
    let mut prev = first;
    for &raw in &sorted[1..] {
        let x = raw.clamp(0.0, support);
        if x > prev {
            acc = (acc + gap_integral(law, prev, x)?).min(1.0);
            prev = x;
        }
        vals.push(acc);
    }
    Ok(vals)
}

/// Composite Simpson over `[a, b]`, subdividing so no panel exceeds 0.01.
fn gap_integral(law: &LossLaw, a: f64, b: f64) -> Result<f64, McError> {
    let pieces = ((b - a) / 0.01).ceil().max(1.0) as usize;
    let width = (b - a) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let lo = a + p as f64 * width;
        let h = width / 4.0;
        let f = |x: f64| pdf_rho(x.min(b), law);
        total += (f(lo)?
            + 4.0 * f(lo + h)?
            + 2.0 * f(lo + 2.0 * h)?
            + 4.0 * f(lo + 3.0 * h)?
            + f(lo + 4.0 * h)?)
            * h
            / 3.0;
    }
    Ok(total)
}

/// One-sample Kolmogorov-Smirnov distance of sorted samples against a cdf,
/// with the asymptotic 1% threshold `1.63 / sqrt(M)`.
pub fn ks_distance(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<KsOutcome, McError> {
    if sorted.is_empty() {
        return Err(McError::EmptySamples);
    }
    let m = sorted.len() as f64;
    let mut stat = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        stat = stat.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    let threshold = KS_CONST_1PCT / m.sqrt();
    Ok(KsOutcome {
        statistic: stat,
        threshold_1pct: threshold,
        pass: stat < threshold,
    })
}

/// KS test of sorted samples against a target law. Uses the closed-form
/// cdf where one exists; otherwise compares against a deterministic
/// empirical reference and widens the threshold to the two-sample form.
/// The second value reports whether the reference was empirical.
pub fn ks_against_law(sorted: &[f64], law: &LossLaw) -> Result<(KsOutcome, bool), McError> {
    if sorted.is_empty() {
        return Err(McError::EmptySamples);
    }
    let reference = RefCdf::new(law)?;
    let vals = reference.values_at(sorted)?;
    let m = sorted.len() as f64;
    let mut stat = 0.0f64;
    for (i, &f) in vals.iter().enumerate() {
        stat = stat.max(f - i as f64 / m).max((i + 1) as f64 / m - f);
    }
    let threshold = match reference.empirical_len() {
        Some(n_ref) => {
            let n = n_ref as f64;
            KS_CONST_1PCT * ((m + n) / (m * n)).sqrt()
        }
        None => KS_CONST_1PCT / m.sqrt(),
    };
    let outcome = KsOutcome {
        statistic: stat,
        threshold_1pct: threshold,
        pass: stat < threshold,
    };
    Ok((outcome, reference.empirical_len().is_some()))
}

/// Two-sample KS distance with the asymptotic 1% threshold
/// `1.63 sqrt((m+n)/(mn))`; sorts both sets in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> Result<KsOutcome, McError> {
    if a.is_empty() || b.is_empty() {
        return Err(McError::EmptySamples);
    }
    a.sort_unstable_by(f64::total_cmp);
    b.sort_unstable_by(f64::total_cmp);
    let (mut i, mut j) = (0usize, 0usize);
    let mut stat = 0.0f64;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let gap = (i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs();
        stat = stat.max(gap);
    }
    let m = a.len() as f64;
    let n = b.len() as f64;
    let threshold = KS_CONST_1PCT * ((m + n) / (m * n)).sqrt();
    Ok(KsOutcome {
        statistic: stat,
        threshold_1pct: threshold,
        pass: stat < threshold,
    })
}

// ── Route comparison ────────────────────────────────────────────────────

/// The loss law matching a scenario's kind, derived from the scenario's
/// own matrices and extras.
pub fn matched_law(scenario: &Scenario, k: usize) -> Result<LossLaw, McError> {
    let n = scenario.dim();
    let missing = |what: &str| McError::Config(format!("scenario lacks {what}"));
    let law = match scenario.kind {
        ScenarioKind::Mvdr => LossLaw::mvdr(n, k)?,
        ScenarioKind::Homog | ScenarioKind::WishartMismatch => {
            let params = derive_general_params(&scenario.sigma, &scenario.ct, &scenario.v)?;
            LossLaw::general(n, k, params)?
        }
        ScenarioKind::Mpdr => {
            let s =
                scenario.soi_power * snr_opt(&scenario.sigma, &scenario.v, 1.0)? / scenario.gamma;
            LossLaw::mpdr(n, k, s)?
        }
        ScenarioKind::Ger => LossLaw::ger(
            n,
            k,
            scenario.extras.lambda.ok_or_else(|| missing("lambda"))?,
            scenario
                .extras
                .omega_eigs
                .clone()
                .ok_or_else(|| missing("omega_eigs"))?,
        )?,
        ScenarioKind::Surprise => LossLaw::undernulled(
            n,
            k,
            scenario.extras.q_form.ok_or_else(|| missing("q_form"))?,
        )?,
        ScenarioKind::Student => {
            LossLaw::student(n, k, scenario.extras.nu.ok_or_else(|| missing("nu"))?)?
        }
    };
    Ok(law)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoutePair {
    pub a: String,
    pub b: String,
    #[serde(flatten)]
    pub outcome: KsOutcome,
}

/// Three-way consistency report for one scenario: direct simulation,
/// representation sampler, and (where available) the closed-form cdf.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RouteComparison {
    pub law: LossLaw,
    pub pairs: Vec<RoutePair>,
    pub any_fail: bool,
}

/// Runs the SMI simulation route and the representation route at `m`
/// trials each, compares them pairwise, and checks both against the
/// closed-form cdf when the law has one.
pub fn compare_routes(
    scenario: &Scenario,
    k: usize,
    m: usize,
    seed: u64,
    threads: usize,
) -> Result<RouteComparison, McError> {
    let law = matched_law(scenario, k)?;
    let config = ExperimentConfig {
        scenario: scenario.clone(),
        filter: FilterSpec::Smi,
        trials: m,
        k,
        seed,
        bins: default_bins(),
        moments: true,
        ks_targets: vec![],
    };
    let result = run_experiment(&config, threads)?;
    let mut direct = result.samples;
    let mut rep = Vec::with_capacity(m);
    let mut rng = RngStream::new(seed.wrapping_add(SEED_MIX), 0);
    for _ in 0..m {
        rep.push(sample_rho(&mut rng, &law)?);
    }
    let mut pairs = Vec::new();
    let two = ks_two_sample(&mut direct, &mut rep)?;
    pairs.push(RoutePair {
        a: "direct".into(),
        b: "representation".into(),
        outcome: two,
    });
    if has_closed_cdf(law.kind) {
        for (name, samples) in [("direct", &direct), ("representation", &rep)] {
            let (outcome, _) = ks_against_law(samples, &law)?;
            pairs.push(RoutePair {
                a: name.into(),
                b: "closed-form".into(),
                outcome,
            });
        }
    }
    let any_fail = pairs.iter().any(|p| !p.outcome.pass);
    Ok(RouteComparison {
        law,
        pairs,
        any_fail,
    })
}

// ── Persistence ─────────────────────────────────────────────────────────

/// Serializes the full result as pretty JSON; reruns of the same config
/// are byte-identical apart from `runtime_ms`.
pub fn write_result_json(path: &Path, result: &ExperimentResult) -> Result<(), McError> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, result)?;
    file.write_all(b"\n")?;
    Ok(())
}

/// Emits a numeric CSV: header line, then rows of `f64` fields in the
/// default shortest-round-trip form. Every writer in this crate goes
/// through here, so parse followed by re-emit is byte-identical.
pub fn emit_csv(header: &str, rows: &[Vec<f64>]) -> String {
    let mut out = String::with_capacity(16 * rows.len() + header.len() + 1);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (j, x) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format!("{x}"));
        }
        out.push('\n');
    }
    out
}

/// Parses a CSV produced by [`emit_csv`] back into its header and rows.
pub fn parse_csv(text: &str) -> Result<(String, Vec<Vec<f64>>), McError> {
    let bad = |line: usize, what: &str| McError::Config(format!("csv line {}: {what}", line + 1));
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(0, "missing header"))?
        .to_string();
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let mut row = Vec::with_capacity(width);
        for field in line.split(',') {
            row.push(
                field
                    .parse::<f64>()
                    .map_err(|_| bad(i + 1, "non-numeric field"))?,
            );
        }
        if row.len() != width {
            return Err(bad(i + 1, "field count differs from header"));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

pub fn write_histogram_csv(path: &Path, histogram: &Histogram) -> Result<(), McError> {
    let rows: Vec<Vec<f64>> = histogram
        .counts
        .iter()
        .enumerate()
        .map(|(idx, &count)| {
            let (left, right) = histogram.bin_edges(idx);
            vec![left, right, count as f64]
        })
        .collect();
    std::fs::write(path, emit_csv("bin_left,bin_right,count", &rows))?;
    Ok(())
}

pub fn write_samples_csv(path: &Path, samples: &[f64]) -> Result<(), McError> {
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .enumerate()
        .map(|(idx, &loss)| vec![idx as f64, loss])
        .collect();
    std::fs::write(path, emit_csv("sample_index,loss", &rows))?;
    Ok(())
}

// ── Tests ───────────────────────────────────────────────────────────────

#[cfg(test)]
mod tests {
    use super::*;
    use snrloss_core::scenario::{build_sigma, make_mvdr, ula_steering, Interferer};

    fn small_config(trials: usize, seed: u64) -> ExperimentConfig {
        let (sigma, _) = build_sigma(
            4,
            &[Interferer {
                angle_deg: -15.0,
                power_db: 20.0,
            }],
            1.0,
        )
        .unwrap();
        let v = ula_steering(4, 0.0).unwrap();
        ExperimentConfig {
            scenario: make_mvdr(sigma, v).unwrap(),
            filter: FilterSpec::Smi,
            trials,
            k: 8,
            seed,
            bins: 10,
            moments: true,
            ks_targets: vec![LossLaw::mvdr(4, 8).unwrap()],
        }
    }

    #[test]
    fn histogram_counts_sum_to_trials() {
        let config = small_config(250, 1);
        let result = run_experiment(&config, 3).unwrap();
        assert_eq!(result.histogram.total(), 250, "histogram mass mismatch");
        assert_eq!(result.samples.len(), 250);
        assert!(
            result.samples.windows(2).all(|w| w[0] <= w[1]),
            "digest not sorted"
        );
        assert!(result.samples.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let config = small_config(300, 7);
        let one = run_experiment(&config, 1).unwrap();
        let many = run_experiment(&config, 5).unwrap();
        assert_eq!(one.samples, many.samples, "same trials, same losses");
        assert_eq!(one.histogram, many.histogram);
        assert_eq!(one.mean, many.mean);
    }

    #[test]
    fn disjoint_ranges_merge_to_the_single_run() {
        let config = small_config(300, 11);
        let whole = run_experiment(&config, 2).unwrap();
        let mut parts = run_trial_range(&config, 120..300).unwrap();
        parts.extend(run_trial_range(&config, 0..120).unwrap());
        let merged = assemble(&config, parts, 0).unwrap();
        assert_eq!(whole.samples, merged.samples);
        assert_eq!(whole.histogram, merged.histogram);
        assert_eq!(whole.variance, merged.variance);
    }

    #[test]
    fn config_floor_violations_are_named() {
        let mut config = small_config(50, 1);
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("floor of 100"), "got: {err}");
        config.trials = 200;
        config.k = 3;
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("K = 3"), "got: {err}");
    }

    #[test]
    fn ks_distance_edge_values() {
        // single sample at the cdf median
        let out = ks_distance(&[0.5], |x| x).unwrap();
        assert!((out.statistic - 0.5).abs() < 1e-12);
        // constant samples against a continuous cdf
        let flat = vec![0.3; 1000];
        let out = ks_distance(&flat, |x| x).unwrap();
        assert!(out.statistic >= 0.5, "got {}", out.statistic);
        assert!(ks_distance(&[], |x| x).is_err());
    }

    #[test]
    fn ks_calibration_against_own_cdf() {
        // uniform samples against the uniform cdf pass a 1% test with
        // probability 0.99 per repeat; requiring 95 of 100 leaves plenty
        // of seed-to-seed slack without hiding a broken threshold
        let mut passes = 0;
        for rep in 0..100u64 {
            let mut rng = RngStream::new(500 + rep, 0);
            let mut xs: Vec<f64> = (0..1000)
                .map(|_| {
                    use snrloss_core::dist::sample_cnormal;
                    // probability transform of |z|^2 ~ Exp(1)
                    1.0 - (-sample_cnormal(&mut rng).norm_sqr()).exp()
                })
                .collect();
            xs.sort_unstable_by(f64::total_cmp);
            if ks_distance(&xs, |x| x.clamp(0.0, 1.0)).unwrap().pass {
                passes += 1;
            }
        }
        assert!(passes >= 95, "only {passes}/100 calibration repeats passed");
    }

    #[test]
    fn mvdr_experiment_passes_its_ks_target() {
        let mut config = small_config(10_000, 21);
        config.bins = 100;
        let result = run_experiment(&config, 4).unwrap();
        let ks = &result.ks_results[0];
        assert!(
            ks.outcome.pass,
            "KS {} over {}",
            ks.outcome.statistic, ks.outcome.threshold_1pct
        );
        assert!(!ks.approximate);
    }

    #[test]
    fn compare_routes_flags_nothing_for_matched_case() {
        let config = small_config(100, 1);
        let report = compare_routes(&config.scenario, 8, 4000, 33, 4).unwrap();
        assert!(!report.any_fail, "pairs: {:?}", report.pairs);
        assert_eq!(report.pairs.len(), 3, "two one-sample rows plus the pair");
    }

    #[test]
    fn stratified_thinning_is_deterministic_and_sized() {
        let sorted: Vec<f64> = (0..2_500_000).map(|i| i as f64).collect();
        let thinned = stratified_thin(&sorted);
        assert_eq!(thinned.len(), 833_333, "stride-3 strata count");
        assert_eq!(thinned[0], 1.0, "middle of the first stratum");
        assert!(thinned.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn trial_errors_carry_the_index() {
        let mut config = small_config(100, 1);
        // K below N makes the SMI covariance singular; bypass validate to
        // exercise the trial-level error path
        config.k = 2;
        let err = run_trial_range(&config, 0..10).unwrap_err();
        match err {
            McError::Trial { index, .. } => assert_eq!(index, 0),
            other => panic!("expected trial error, got {other}"),
        }
    }
}
