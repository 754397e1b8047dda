//! Seeded Monte Carlo runner.
//!
//! Trial `t` draws its noise from [`trial_rng`]`(seed, t)` (and, for uniform
//! adversaries, its hidden function from a sibling stream). Trials run on the
//! rayon pool and records are merged in trial order, so output never depends
//! on the thread count.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classes::{
    info_lock_open, make_info_lock, make_informative_chain, make_informative_k, informative_k_companion,
    ClassSpec, InfoLockParams, InformativeKParams,
};
use crate::error::{Error, Result};
use crate::learners::{LearnerContext, LearnerFactory, LearnerSpec};
use crate::metrics::{divergence_budget, huber_bretagnolle_bound, pinsker_bound};
use crate::model::{eps_optimal_set, sample_reward, ActionId, Decision, ExplicitClass, History, NoiseModel, RewardFunction};
use crate::rational::{self, Exact, Rational};
use crate::rng::{trial_rng, trial_seed};

/// How the hidden function is chosen.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Adversary {
    /// Every trial runs against the same class member.
    Fixed { function: usize },
    /// Each member gets `ceil(trials / |F|)` trials; the summary reports the worst.
    #[default]
    WorstOverClass,
    /// Each trial draws a member uniformly at random.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    /// Run until the learner stops; `budget` caps the query count.
    #[default]
    Identify,
    /// `budget` is the horizon; after a stop the output is played until the horizon.
    Regret,
}

fn one() -> u64 {
    1
}

fn zero_eps() -> Exact {
    Exact(rational::zero())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub class: ClassSpec,
    pub learner: LearnerSpec,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default = "zero_eps")]
    pub epsilon: Exact,
    #[serde(default = "one")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    pub budget: u64,
    #[serde(default)]
    pub adversary: Adversary,
    #[serde(default)]
    pub mode: RunMode,
    /// Record wall-clock time per trial. Off by default because it makes
    /// outputs differ between runs.
    #[serde(default)]
    pub timing: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::domain("trials must be >= 1"));
        }
        if self.budget < 1 {
            return Err(Error::domain("budget must be >= 1"));
        }
        NoiseModel::new(self.sigma)?;
        if self.epsilon.0 < rational::zero() {
            return Err(Error::domain("epsilon must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub function_index: usize,
    pub queries: u64,
    pub output_action: Option<usize>,
    pub success: bool,
    pub regret: f64,
    pub error_tag: Option<String>,
    pub wallclock_ns: Option<u64>,
}

/// Per-trial knobs shared by every run of an experiment.
#[derive(Debug, Clone)]
pub struct TrialSettings {
    pub noise: NoiseModel,
    pub epsilon: Rational,
    pub budget: u64,
    pub mode: RunMode,
    pub timing: bool,
}

/// A record plus the pull count of every action (including post-stop plays
/// in regret mode).
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: TrialRecord,
    pub pulls: Vec<u64>,
}

/// `sum_a pulls[a] * (max f - f(a))`, exact until the final conversion.
pub fn regret_of_pulls(f: &RewardFunction, pulls: &[u64]) -> f64 {
    let max = f.max_value();
    let total: Rational = pulls
        .iter()
        .zip(f.values())
        .filter(|(n, _)| **n > 0)
        .map(|(n, v)| (max - v) * Rational::from_integer(BigInt::from(*n)))
        .sum();
    rational::to_f64(&total)
}

/// Runs one learner against `f`.
pub fn run_trial(
    factory: &LearnerFactory,
    f: &RewardFunction,
    function_index: usize,
    settings: &TrialSettings,
    trial: u64,
    master_seed: u64,
) -> TrialOutcome {
    let seed = trial_seed(master_seed, trial);
    let mut rng = trial_rng(master_seed, trial);
    let start = settings.timing.then(Instant::now);
    let mut pulls = vec![0u64; f.n_actions()];
    let mut history = History::new();
    let mut output = None;
    let mut error = None;

    match factory.spawn() {
        Err(e) => error = Some(e),
        Ok(mut learner) => loop {
            let decision = match learner.decide(&history) {
                Ok(d) => d,
                Err(e) => {
                    error = Some(e);
                    break;
                }
            };
            match decision {
                Decision::Stop(a) => {
                    if a.0 >= f.n_actions() {
                        error = Some(Error::InvalidAction { index: a.0, n_actions: f.n_actions() });
                    } else {
                        output = Some(a);
                    }
                    break;
                }
                Decision::Query(a) => {
                    if history.len() as u64 >= settings.budget {
                        if settings.mode == RunMode::Identify {
                            error = Some(Error::protocol(format!("learner exceeded the budget of {}", settings.budget)));
                        }
                        break;
                    }
                    match sample_reward(f, a, &settings.noise, &mut rng) {
                        Ok(r) => {
                            pulls[a.0] += 1;
                            history.push(a, r);
                        }
                        Err(e) => {
                            error = Some(e);
                            break;
                        }
                    }
                }
            }
        },
    }

    let queries = history.len() as u64;
    if settings.mode == RunMode::Regret {
        if let Some(a) = output {
            pulls[a.0] += settings.budget.saturating_sub(queries);
        }
    }
    let success = error.is_none()
        && output.is_some_and(|a| eps_optimal_set(f, &settings.epsilon).contains(&a));
    let record = TrialRecord {
        trial,
        seed,
        function_index,
        queries,
        output_action: output.map(|a| a.0),
        success,
        regret: regret_of_pulls(f, &pulls),
        error_tag: error.map(|e| e.tag().to_string()),
        wallclock_ns: start.map(|s| s.elapsed().as_nanos() as u64),
    };
    TrialOutcome { record, pulls }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSummary {
    pub function_index: usize,
    pub trials: u64,
    pub success_rate: f64,
    pub success_se: f64,
    pub mean_queries: f64,
    pub max_queries: u64,
    pub mean_regret: f64,
    pub regret_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub trials: u64,
    pub success_rate: f64,
    pub success_se: f64,
    /// Normal-approximation binomial interval, clipped to `[0, 1]`.
    pub success_ci95: [f64; 2],
    pub mean_queries: f64,
    pub queries_se: f64,
    pub max_queries: u64,
    pub mean_regret: f64,
    pub regret_se: f64,
    pub errors: u64,
    pub worst_function: FunctionSummary,
    pub per_function: Vec<FunctionSummary>,
    pub config_echo: serde_json::Value,
    pub code_version: String,
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Binomial rate and its standard error `sqrt(p (1 - p) / n)`.
pub fn rate_se(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / n as f64;
    (p, (p * (1.0 - p) / n as f64).sqrt())
}

fn function_summary(index: usize, records: &[&TrialRecord]) -> FunctionSummary {
    let n = records.len() as u64;
    let (success_rate, success_se) = rate_se(records.iter().filter(|r| r.success).count() as u64, n);
    let queries: Vec<f64> = records.iter().map(|r| r.queries as f64).collect();
    let regrets: Vec<f64> = records.iter().map(|r| r.regret).collect();
    let (mean_regret, regret_se) = mean_se(&regrets);
    FunctionSummary {
        function_index: index,
        trials: n,
        success_rate,
        success_se,
        mean_queries: mean_se(&queries).0,
        max_queries: records.iter().map(|r| r.queries).max().unwrap_or(0),
        mean_regret,
        regret_se,
    }
}

/// Aggregates records. The worst function is the one with the lowest success
/// rate (identify mode) or the highest mean regret (regret mode); remaining
/// ties go to the higher regret, then the lower index.
pub fn summarize(records: &[TrialRecord], mode: RunMode, config_echo: serde_json::Value) -> Summary {
    let n = records.len() as u64;
    let (success_rate, success_se) = rate_se(records.iter().filter(|r| r.success).count() as u64, n);
    let queries: Vec<f64> = records.iter().map(|r| r.queries as f64).collect();
    let regrets: Vec<f64> = records.iter().map(|r| r.regret).collect();
    let (mean_queries, queries_se) = mean_se(&queries);
    let (mean_regret, regret_se) = mean_se(&regrets);

    let n_f = records.iter().map(|r| r.function_index + 1).max().unwrap_or(0);
    let mut by_function: Vec<Vec<&TrialRecord>> = vec![Vec::new(); n_f];
    for r in records {
        by_function[r.function_index].push(r);
    }
    let per_function: Vec<FunctionSummary> = by_function
        .iter()
        .enumerate()
        .filter(|(_, rs)| !rs.is_empty())
        .map(|(i, rs)| function_summary(i, rs))
        .collect();
    let worse = |a: &FunctionSummary, b: &FunctionSummary| match mode {
        RunMode::Identify => {
            a.success_rate < b.success_rate || (a.success_rate == b.success_rate && a.mean_regret > b.mean_regret)
        }
        RunMode::Regret => a.mean_regret > b.mean_regret,
    };
    let mut worst = per_function[0].clone();
    for s in &per_function[1..] {
        if worse(s, &worst) {
            worst = s.clone();
        }
    }

    let half = 1.96 * success_se;
    Summary {
        trials: n,
        success_rate,
        success_se,
        success_ci95: [(success_rate - half).max(0.0), (success_rate + half).min(1.0)],
        mean_queries,
        queries_se,
        max_queries: records.iter().map(|r| r.queries).max().unwrap_or(0),
        mean_regret,
        regret_se,
        errors: records.iter().filter(|r| r.error_tag.is_some()).count() as u64,
        worst_function: worst,
        per_function,
        config_echo,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Hidden function for uniform adversaries, drawn from its own stream so the
/// noise stream of a trial does not depend on the adversary.
fn function_draw(master: u64, trial: u64, n_f: usize) -> usize {
    trial_rng(master ^ 0xA5A5_A5A5_A5A5_A5A5, trial).random_range(0..n_f)
}

/// Runs `trials` trials of `factory` on `class` under `adversary`.
pub fn run_with(
    class: &ExplicitClass,
    factory: &LearnerFactory,
    settings: &TrialSettings,
    adversary: &Adversary,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialOutcome>> {
    let n_f = class.n_functions();
    let total = match adversary {
        Adversary::Fixed { function } => {
            class.function(*function)?;
            trials
        }
        Adversary::WorstOverClass => trials.div_ceil(n_f as u64) * n_f as u64,
        Adversary::Uniform => trials,
    };
    let outcomes = (0..total)
        .into_par_iter()
        .map(|t| {
            let index = match adversary {
                Adversary::Fixed { function } => *function,
                Adversary::WorstOverClass => (t % n_f as u64) as usize,
                Adversary::Uniform => function_draw(seed, t, n_f),
            };
            run_trial(factory, &class.functions()[index], index, settings, t, seed)
        })
        .collect();
    Ok(outcomes)
}

fn learner_context(config: &ExperimentConfig) -> LearnerContext {
    LearnerContext {
        sigma: config.sigma,
        epsilon: config.epsilon.0.clone(),
        horizon: (config.mode == RunMode::Regret).then_some(config.budget),
    }
}

/// Builds the class and learner described by `config` and runs it.
pub fn run_trials(config: &ExperimentConfig) -> Result<Experiment> {
    config.validate()?;
    let class = Arc::new(config.class.build()?);
    let factory = LearnerFactory::new(config.learner.clone(), class.clone(), &learner_context(config))?;
    let settings = TrialSettings {
        noise: NoiseModel::new(config.sigma)?,
        epsilon: config.epsilon.0.clone(),
        budget: config.budget,
        mode: config.mode,
        timing: config.timing,
    };
    let outcomes = run_with(&class, &factory, &settings, &config.adversary, config.trials, config.seed)?;
    let records: Vec<TrialRecord> = outcomes.into_iter().map(|o| o.record).collect();
    let echo = serde_json::to_value(config).map_err(|e| Error::Parse(e.to_string()))?;
    let summary = summarize(&records, config.mode, echo);
    Ok(Experiment { records, summary })
}

pub const CSV_HEADER: [&str; 9] =
    ["trial", "seed", "function_index", "queries", "output_action", "success", "regret", "error_tag", "wallclock_ns"];

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Parse(format!("csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.seed.to_string(),
            r.function_index.to_string(),
            r.queries.to_string(),
            r.output_action.map(|a| a.to_string()).unwrap_or_default(),
            r.success.to_string(),
            r.regret.to_string(),
            r.error_tag.clone().unwrap_or_default(),
            r.wallclock_ns.map(|n| n.to_string()).unwrap_or_default(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Parse(format!("csv: {e}")))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<TrialRecord>> {
    let bad = |what: &str| Error::Parse(format!("csv: bad {what}"));
    let mut rd = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row.map_err(|e| Error::Parse(format!("csv: {e}")))?;
        let opt = |s: &str| if s.is_empty() { None } else { Some(s.to_string()) };
        out.push(TrialRecord {
            trial: row[0].parse().map_err(|_| bad("trial"))?,
            seed: row[1].parse().map_err(|_| bad("seed"))?,
            function_index: row[2].parse().map_err(|_| bad("function_index"))?,
            queries: row[3].parse().map_err(|_| bad("queries"))?,
            output_action: opt(&row[4]).map(|s| s.parse()).transpose().map_err(|_| bad("output_action"))?,
            success: row[5].parse().map_err(|_| bad("success"))?,
            regret: row[6].parse().map_err(|_| bad("regret"))?,
            error_tag: opt(&row[7]),
            wallclock_ns: opt(&row[8]).map(|s| s.parse()).transpose().map_err(|_| bad("wallclock_ns"))?,
        });
    }
    Ok(out)
}

pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(out).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(())
}

/// Outcome of comparing a learner's behaviour under two reward functions.
#[derive(Debug, Clone, Serialize)]
pub struct PinskerReport {
    pub trials: u64,
    pub p0: f64,
    pub p1: f64,
    pub se0: f64,
    pub se1: f64,
    /// Mean pulls per action under `f0`.
    pub mean_pulls: Vec<f64>,
    pub kl: f64,
    pub pinsker_bound: f64,
    pub huber_bretagnolle_bound: f64,
    /// `pinsker_bound + slack - |p0 - p1|`.
    pub pinsker_margin: f64,
    /// `p0 + (1 - p1) + slack - huber_bretagnolle_bound`.
    pub hb_margin: f64,
    pub pinsker_holds: bool,
    pub hb_holds: bool,
}

/// Runs `factory` against `f0` and `f1`, `trials` times each, and checks
/// `|P0(E) - P1(E)| <= sqrt(KL/2)` and `P0(E) + P1(E^c) >= exp(-KL)` with
/// 3-standard-error slack, where KL comes from the pull counts under `f0`.
pub fn pinsker_check(
    factory: &LearnerFactory,
    f0: &RewardFunction,
    f1: &RewardFunction,
    event: impl Fn(&TrialRecord) -> bool + Sync,
    settings: &TrialSettings,
    trials: u64,
    seed: u64,
) -> Result<PinskerReport> {
    if f0.n_actions() != f1.n_actions() {
        return Err(Error::domain("the two functions must share an action space"));
    }
    if settings.noise.is_noise_free() {
        return Err(Error::domain("pinsker_check needs sigma > 0"));
    }
    let run = |f: &RewardFunction, index: usize, offset: u64| -> Vec<TrialOutcome> {
        (0..trials)
            .into_par_iter()
            .map(|t| run_trial(factory, f, index, settings, offset + t, seed))
            .collect()
    };
    let out0 = run(f0, 0, 0);
    let out1 = run(f1, 1, trials);
    let (p0, se0) = rate_se(out0.iter().filter(|o| event(&o.record)).count() as u64, trials);
    let (p1, se1) = rate_se(out1.iter().filter(|o| event(&o.record)).count() as u64, trials);
    let mut mean_pulls = vec![0.0; f0.n_actions()];
    for o in &out0 {
        for (m, n) in mean_pulls.iter_mut().zip(&o.pulls) {
            *m += *n as f64;
        }
    }
    mean_pulls.iter_mut().for_each(|m| *m /= trials as f64);
    let gaps: Vec<f64> = f0.floats().iter().zip(f1.floats()).map(|(a, b)| a - b).collect();
    let kl = divergence_budget(&mean_pulls, &gaps, settings.noise.sigma())?;
    let slack = 3.0 * (se0 + se1);
    let pb = pinsker_bound(kl);
    let hb = huber_bretagnolle_bound(kl);
    let pinsker_margin = pb + slack - (p0 - p1).abs();
    let hb_margin = p0 + (1.0 - p1) + slack - hb;
    Ok(PinskerReport {
        trials,
        p0,
        p1,
        se0,
        se1,
        mean_pulls,
        kl,
        pinsker_bound: pb,
        huber_bretagnolle_bound: hb,
        pinsker_margin,
        hb_margin,
        pinsker_holds: pinsker_margin >= 0.0,
        hb_holds: hb_margin >= 0.0,
    })
}

/// The `f̄_K` vs `f_i` comparison on the informative-K class with the
/// two-phase learner; `i` is the code adjacent to `f̄_K`'s `a_0` value.
pub fn pinsker_informative(k: usize, sigma: f64, trials: u64, seed: u64) -> Result<PinskerReport> {
    let class = Arc::new(make_informative_k(InformativeKParams { k })?);
    let ctx = LearnerContext::new(sigma, rational::zero());
    let factory = LearnerFactory::new(LearnerSpec::TwoPhase { k, sigma: None }, class.clone(), &ctx)?;
    let budget = factory.max_queries().unwrap_or(u64::MAX);
    let target = k - 1;
    let settings =
        TrialSettings { noise: NoiseModel::new(sigma)?, epsilon: rational::zero(), budget, mode: RunMode::Identify, timing: false };
    pinsker_check(
        &factory,
        &informative_k_companion(k),
        class.function(target - 1)?,
        move |r| r.output_action == Some(target),
        &settings,
        trials,
        seed,
    )
}

/// The `f_0'` vs `f_1` comparison on the info-lock class with the decode
/// learner; the event is "output is the first `A_2` action".
pub fn pinsker_info_lock(k: usize, eps1: f64, sigma: f64, trials: u64, seed: u64) -> Result<PinskerReport> {
    let params = InfoLockParams { k, eps1, eps2: 4.0 * eps1 * eps1 };
    let class = Arc::new(make_info_lock(params)?);
    let ctx = LearnerContext::new(sigma, rational::zero());
    let spec = LearnerSpec::InfoLockDecode { k, eps1, sigma: None, delta: None };
    let factory = LearnerFactory::new(spec, class.clone(), &ctx)?;
    let budget = factory.max_queries().unwrap_or(u64::MAX);
    let first_a2 = crate::classes::info_lock_bits(k);
    let settings =
        TrialSettings { noise: NoiseModel::new(sigma)?, epsilon: rational::zero(), budget, mode: RunMode::Identify, timing: false };
    pinsker_check(
        &factory,
        &info_lock_open(&params)?,
        class.function(0)?,
        move |r| r.output_action == Some(first_a2),
        &settings,
        trials,
        seed,
    )
}

/// Regret of the decode learner versus UCB on the info-lock class.
#[derive(Debug, Clone, Serialize)]
pub struct SeparationReport {
    pub d: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub horizon: u64,
    /// Queries the decode learner spends before committing.
    pub identification_budget: u64,
    /// `[ln(4/3) / (2 eps1^2), 16 ln K ln(4 ln K) / eps1^2]`.
    pub sandwich: [f64; 2],
    pub identification: Summary,
    pub ucb: Summary,
    /// `d / 128`.
    pub regret_floor: f64,
    /// `8 sqrt(2 T ln T)`.
    pub ucb_ceiling: f64,
}

/// Info-lock with `K` codes, `eps1 = sqrt(ln(4/3) / (2d))` and
/// `eps2 = 4 eps1^2`. The decode learner runs in regret mode (committing to its
/// output for the rest of the horizon); UCB runs over the `A_2` actions only.
pub fn separation_experiment(k: usize, d: f64, horizon: u64, sigma: f64, trials: u64, seed: u64) -> Result<SeparationReport> {
    if !(d > 0.0) {
        return Err(Error::domain("d must be > 0"));
    }
    let eps1 = ((4.0f64 / 3.0).ln() / (2.0 * d)).sqrt();
    let eps2 = 4.0 * eps1 * eps1;
    let class_spec = ClassSpec::InfoLock { k, eps1, eps2 };
    let bits = crate::classes::info_lock_bits(k);
    let run = |learner: LearnerSpec| -> Result<Experiment> {
        run_trials(&ExperimentConfig {
            class: class_spec.clone(),
            learner,
            sigma,
            epsilon: Exact(rational::zero()),
            trials,
            seed,
            budget: horizon,
            adversary: Adversary::WorstOverClass,
            mode: RunMode::Regret,
            timing: false,
        })
    };
    let ident = run(LearnerSpec::InfoLockDecode { k, eps1, sigma: None, delta: None })?;
    let ucb = run(LearnerSpec::Ucb { horizon: None, sigma: None, arms: Some((bits..bits + k).collect()) })?;
    let decode = crate::learners::InfoLockDecode::new(k, eps1, sigma, 0.25)?;
    let ln_k = (k as f64).ln();
    let t = horizon as f64;
    Ok(SeparationReport {
        d,
        eps1,
        eps2,
        horizon,
        identification_budget: decode.budget(),
        sandwich: [(4.0f64 / 3.0).ln() / (2.0 * eps1 * eps1), 16.0 * ln_k * (4.0 * ln_k).ln() / (eps1 * eps1)],
        identification: ident.summary,
        ucb: ucb.summary,
        regret_floor: d / 128.0,
        ucb_ceiling: 8.0 * (2.0 * t * t.ln()).sqrt(),
    })
}

/// One row of the unlearnability diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct TruncationRow {
    pub budget: u64,
    pub n_functions: usize,
    pub worst_success: f64,
    pub mean_success: f64,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct UnlearnabilityReport {
    /// This only shows that the implemented learner fails; it says nothing
    /// about learners that were not run.
    pub probative: bool,
    pub threshold: f64,
    pub sigma: f64,
    pub rows: Vec<TruncationRow>,
}

/// Runs the denoised QC-optimal learner on the informative chain truncated
/// to `N = 16 n` members with budget `n`, and reports whether its worst-case
/// success falls below `3/4`.
pub fn unlearnability_diagnostic(budgets: &[u64], sigma: f64, trials_per_function: u64, seed: u64) -> Result<UnlearnabilityReport> {
    let threshold = 0.75;
    let mut rows = Vec::new();
    for &n in budgets {
        let n_f = 16 * n as usize;
        let class = Arc::new(make_informative_chain(n_f)?);
        let inner = LearnerSpec::VsGreedy { epsilon: None, cap: Some(n_f) };
        let spec = LearnerSpec::Denoise { inner: Box::new(inner), delta: 0.25, delta_prime: 0.0 };
        let factory = LearnerFactory::new(spec, class.clone(), &LearnerContext::new(sigma, rational::zero()))?;
        let settings =
            TrialSettings { noise: NoiseModel::new(sigma)?, epsilon: rational::zero(), budget: n, mode: RunMode::Identify, timing: false };
        let outcomes = run_with(&class, &factory, &settings, &Adversary::WorstOverClass, trials_per_function * n_f as u64, seed)?;
        let records: Vec<TrialRecord> = outcomes.into_iter().map(|o| o.record).collect();
        let s = summarize(&records, RunMode::Identify, serde_json::Value::Null);
        rows.push(TruncationRow {
            budget: n,
            n_functions: n_f,
            worst_success: s.worst_function.success_rate,
            mean_success: s.success_rate,
            below_threshold: s.worst_function.success_rate < threshold,
        });
    }
    Ok(UnlearnabilityReport { probative: false, threshold, sigma, rows })
}

/// Actions the learner output, as a convenience for event predicates.
pub fn output_is(action: ActionId) -> impl Fn(&TrialRecord) -> bool + Sync {
    move |r| r.output_action == Some(action.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::TwoPhasePlan;

    fn tree_config(trials: u64, seed: u64) -> ExperimentConfig {
        serde_json::from_value(serde_json::json!({
            "class": {"kind": "tree", "d": 3, "delta": 0.5},
            "learner": {"kind": "vs_greedy", "epsilon": 0.1},
            "epsilon": "1/10",
            "trials": trials,
            "seed": seed,
            "budget": 3,
        }))
        .unwrap()
    }

    #[test]
    fn tree_vs_greedy_always_succeeds() {
        let e = run_trials(&tree_config(16, 5)).unwrap();
        assert_eq!(e.records.len(), 16);
        assert_eq!(e.summary.success_rate, 1.0);
        assert!(e.records.iter().all(|r| r.queries <= 3 && r.error_tag.is_none()));
        assert_eq!(e.summary.per_function.len(), 8);
    }

    #[test]
    fn same_seed_same_records() {
        let mut cfg = tree_config(40, 9);
        cfg.sigma = 0.05;
        cfg.learner = serde_json::from_str(r#"{"kind":"denoise","inner":{"kind":"vs_greedy"},"delta":0.1}"#).unwrap();
        let a = run_trials(&cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| run_trials(&cfg).unwrap());
        assert_eq!(a.records, b.records);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_csv(&a.records, &mut x).unwrap();
        write_csv(&b.records, &mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(read_csv(&x[..]).unwrap(), a.records);
    }

    #[test]
    fn budget_overrun_is_a_failed_trial() {
        let mut cfg = tree_config(8, 1);
        cfg.budget = 1;
        let e = run_trials(&cfg).unwrap();
        assert!(e.records.iter().all(|r| !r.success && r.error_tag.as_deref() == Some("protocol")));
        assert!(e.records.iter().all(|r| r.queries <= 1));
    }

    #[test]
    fn regret_matches_pull_sequence() {
        // Recompute regret from an independent replay of the same trial.
        let class = Arc::new(make_informative_k(InformativeKParams { k: 4 }).unwrap());
        let ctx = LearnerContext { sigma: 1.0, epsilon: rational::zero(), horizon: Some(200) };
        let factory = LearnerFactory::new(LearnerSpec::Ucb { horizon: None, sigma: None, arms: None }, class.clone(), &ctx).unwrap();
        let settings =
            TrialSettings { noise: NoiseModel::new(1.0).unwrap(), epsilon: rational::zero(), budget: 200, mode: RunMode::Regret, timing: false };
        let f = class.function(2).unwrap();
        let o = run_trial(&factory, f, 2, &settings, 0, 77);

        let mut rng = trial_rng(77, 0);
        let mut learner = factory.spawn().unwrap();
        let mut h = History::new();
        let mut total = 0.0;
        let max = f.floats().iter().cloned().fold(f64::MIN, f64::max);
        while let Decision::Query(a) = learner.decide(&h).unwrap() {
            if h.len() == 200 {
                break;
            }
            total += max - f.floats()[a.0];
            h.push(a, sample_reward(f, a, &settings.noise, &mut rng).unwrap());
        }
        assert_eq!(o.record.queries, 200);
        assert!((o.record.regret - total).abs() < 1e-9);
        assert!(o.record.regret >= 0.0);
    }

    #[test]
    fn identical_functions_have_zero_kl() {
        let class = Arc::new(make_informative_k(InformativeKParams { k: 4 }).unwrap());
        let ctx = LearnerContext::new(1.0, rational::zero());
        let factory = LearnerFactory::new(LearnerSpec::TwoPhase { k: 4, sigma: None }, class.clone(), &ctx).unwrap();
        let settings = TrialSettings {
            noise: NoiseModel::new(1.0).unwrap(),
            epsilon: rational::zero(),
            budget: TwoPhasePlan::new(4, 1.0).unwrap().max_budget(),
            mode: RunMode::Identify,
            timing: false,
        };
        let f = class.function(1).unwrap();
        let r = pinsker_check(&factory, f, f, output_is(ActionId(2)), &settings, 400, 3).unwrap();
        assert_eq!(r.kl, 0.0);
        assert!(r.pinsker_holds && r.hb_holds);
        assert!((r.p0 - r.p1).abs() <= 3.0 * (r.se0 + r.se1) + 1e-12);
    }

    #[test]
    fn pinsker_needs_noise() {
        let class = Arc::new(make_informative_k(InformativeKParams { k: 4 }).unwrap());
        let ctx = LearnerContext::new(0.0, rational::zero());
        let factory = LearnerFactory::new(LearnerSpec::TwoPhase { k: 4, sigma: None }, class.clone(), &ctx).unwrap();
        let settings =
            TrialSettings { noise: NoiseModel::noise_free(), epsilon: rational::zero(), budget: 1, mode: RunMode::Identify, timing: false };
        let f = class.function(0).unwrap();
        assert!(pinsker_check(&factory, f, f, |_| true, &settings, 10, 0).is_err());
    }

    #[test]
    fn config_rejects_unknown_fields_and_zero_trials() {
        let bad = r#"{"class":{"kind":"tree","d":2,"delta":0.5},"learner":{"kind":"vs_greedy"},"budget":2,"extra":1}"#;
        assert!(serde_json::from_str::<ExperimentConfig>(bad).is_err());
        let mut cfg = tree_config(1, 0);
        cfg.trials = 0;
        assert!(run_trials(&cfg).is_err());
    }
}
