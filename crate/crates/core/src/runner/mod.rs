//! Trajectory engine, Bayes regret over the uniform prior on elevated sets,
//! scaling fits and report documents.
//!
//! Regret is pseudo-regret: each round contributes `R_v(S*) − R_v(S_t)` in
//! expected revenue. Realised revenue is recorded alongside for diagnostics.

pub mod report;
pub mod seeds;

use std::fmt;
use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversarial::{
    all_elevated_sets, build_instance, epsilon_schedule, sample_elevated_set, theorem_applicable,
    theorem_lower_bound, AdversarialSpec, LowerBoundValue,
};
use crate::divergence::trajectory_count_audit;
use crate::mnl::{best_assortment, choice_distribution, expected_revenue, sample_choice, Assortment, MnlInstance, Outcome};
use crate::policy::{Observation, Policy, PolicySpec, PublicView, UcbConstants};
use crate::{Error, Result};

use self::report::{sig12, ReportDocument};

/// Above this many size-`K` subsets the prior is sampled rather than enumerated.
pub const EXHAUSTIVE_PRIOR_LIMIT: u128 = 10_000;

/// Per-item offer counts of one trajectory.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OfferCounts {
    /// `Nᵢ`: rounds in which item `i` was offered.
    pub n_raw: Vec<u64>,
    /// `Ñᵢ`: rounds in which item `i` was in the padded size-`K` superset.
    pub n_padded: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub policy: String,
    pub seed: u64,
    pub instance: Option<AdversarialSpec>,
    pub step_regrets: Vec<f64>,
    pub cumulative_regret: f64,
    pub realized_revenue: f64,
}

/// An instance together with its optimal assortment.
#[derive(Clone, Debug)]
pub struct Environment {
    instance: MnlInstance,
    optimum: Assortment,
    optimal_value: f64,
    spec: Option<AdversarialSpec>,
}

impl Environment {
    /// Finds the optimum by enumeration (`N ≤ 25`).
    pub fn new(instance: MnlInstance) -> Result<Self> {
        let (optimum, optimal_value) = best_assortment(&instance)?;
        Ok(Self {
            instance,
            optimum,
            optimal_value,
            spec: None,
        })
    }

    /// Planted instances have their elevated set as the optimum at any `N`.
    pub fn planted(spec: &AdversarialSpec) -> Self {
        let instance = build_instance(spec);
        let optimum = spec.elevated_set().clone();
        let optimal_value = expected_revenue(&instance, &optimum).expect("elevated set fits the instance");
        Self {
            instance,
            optimum,
            optimal_value,
            spec: Some(spec.clone()),
        }
    }

    pub fn instance(&self) -> &MnlInstance {
        &self.instance
    }

    pub fn optimum(&self) -> (&Assortment, f64) {
        (&self.optimum, self.optimal_value)
    }
}

/// Smallest-id padding of `s` to exactly `K` items.
pub fn pad_assortment(s: &Assortment, n_items: usize, capacity: usize) -> Result<Assortment> {
    if capacity > n_items {
        return Err(Error::Domain(format!("cannot pad to {capacity} items out of {n_items}")));
    }
    if s.len() > capacity {
        return Err(Error::CapacityViolation {
            size: s.len(),
            capacity,
        });
    }
    let missing = capacity - s.len();
    let mut items = s.items().to_vec();
    items.extend((1..=n_items).filter(|&i| !s.contains(i)).take(missing));
    Assortment::new(items)
}

/// Runs `horizon` rounds of act / sample / observe.
pub fn run_trajectory(
    policy: &mut dyn Policy,
    env: &Environment,
    horizon: usize,
    seed: u64,
) -> Result<(RegretTrace, OfferCounts)> {
    let instance = &env.instance;
    let n = instance.n_items();
    let view = PublicView::from(instance);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = OfferCounts {
        n_raw: vec![0; n],
        n_padded: vec![0; n],
    };
    let mut step_regrets = Vec::with_capacity(horizon);
    let mut cumulative = 0.0;
    let mut realized = 0.0;
    // (offered, distribution, step regret, padded) of the previous round
    let mut cache: Option<(Assortment, crate::mnl::ChoiceDistribution, f64, Assortment)> = None;

    for step in 0..horizon {
        let offered = policy.act(&view)?;
        if cache.as_ref().is_none_or(|(prev, ..)| *prev != offered) {
            instance.validate(&offered).map_err(|e| {
                Error::Protocol(format!("{} offered an invalid assortment at step {step}: {e}", policy.name()))
            })?;
            let dist = choice_distribution(instance, &offered)?;
            let regret = env.optimal_value - expected_revenue(instance, &offered)?;
            let padded = pad_assortment(&offered, n, instance.capacity())?;
            cache = Some((offered.clone(), dist, regret, padded));
        }
        let (_, dist, regret, padded) = cache.as_ref().expect("filled above");
        let outcome = sample_choice(dist, &mut rng);
        if let Outcome::Item(i) = outcome {
            realized += instance.revenue(i);
        }
        for &i in offered.items() {
            counts.n_raw[i - 1] += 1;
        }
        for &i in padded.items() {
            counts.n_padded[i - 1] += 1;
        }
        step_regrets.push(*regret);
        cumulative += regret;
        policy.observe(&Observation {
            offered,
            outcome,
            step,
        })?;
    }

    let trace = RegretTrace {
        policy: policy.name().to_string(),
        seed,
        instance: env.spec.clone(),
        step_regrets,
        cumulative_regret: cumulative,
        realized_revenue: realized,
    };
    Ok((trace, counts))
}

/// `ε` used for the planted instances: the schedule or a fixed override.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum EpsilonMode {
    #[default]
    Auto,
    Fixed(f64),
}

impl EpsilonMode {
    pub fn resolve(self, n_items: usize, horizon: usize) -> f64 {
        match self {
            EpsilonMode::Auto => epsilon_schedule(n_items, horizon),
            EpsilonMode::Fixed(eps) => eps,
        }
    }
}

impl Serialize for EpsilonMode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EpsilonMode::Auto => serializer.serialize_str("auto"),
            EpsilonMode::Fixed(eps) => serializer.serialize_f64(*eps),
        }
    }
}

impl<'de> Deserialize<'de> for EpsilonMode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Word(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(eps) => Ok(EpsilonMode::Fixed(eps)),
            Repr::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl std::str::FromStr for EpsilonMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(EpsilonMode::Auto);
        }
        s.parse::<f64>()
            .map(EpsilonMode::Fixed)
            .map_err(|_| Error::Config(format!("epsilon must be 'auto' or a number, got '{s}'")))
    }
}

impl fmt::Display for EpsilonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EpsilonMode::Auto => f.write_str("auto"),
            EpsilonMode::Fixed(eps) => write!(f, "{eps}"),
        }
    }
}

/// How elevated sets are chosen across draws.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMode {
    /// Exhaustive when `C(N, K) ≤ 10⁴`, sampled otherwise.
    #[default]
    Auto,
    Sampled,
    Exhaustive,
    /// Every draw uses this set.
    Planted(Assortment),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolvedPrior {
    Sampled,
    Exhaustive,
    Planted,
}

fn default_n() -> usize {
    16
}
fn default_k() -> usize {
    4
}
fn default_t() -> usize {
    1024
}
fn default_policy() -> PolicySpec {
    PolicySpec::EpochUcb {
        constants: UcbConstants::default(),
    }
}
fn default_draws() -> usize {
    40
}
fn default_reps() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_n")]
    pub n_items: usize,
    #[serde(default = "default_k")]
    pub capacity: usize,
    #[serde(default = "default_t")]
    pub horizon: usize,
    #[serde(default = "default_policy")]
    pub policy: PolicySpec,
    #[serde(default)]
    pub epsilon: EpsilonMode,
    #[serde(default)]
    pub prior: PriorMode,
    #[serde(default = "default_draws")]
    pub draws: usize,
    #[serde(default = "default_reps")]
    pub replications: usize,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; `None` uses every core. Never affects results.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parallelism: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_items == 0 || self.capacity == 0 || self.horizon == 0 {
            return bad("N, K and T must be positive".into());
        }
        if self.capacity > self.n_items {
            return bad(format!("K = {} exceeds N = {}", self.capacity, self.n_items));
        }
        if self.draws == 0 {
            return bad("at least one prior draw is required".into());
        }
        if self.replications == 0 {
            return bad("at least one replication is required".into());
        }
        if self.parallelism == Some(0) {
            return bad("parallelism must be at least 1".into());
        }
        if let EpsilonMode::Fixed(eps) = self.epsilon {
            crate::adversarial::check_epsilon(eps).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let PriorMode::Planted(set) = &self.prior {
            AdversarialSpec::new(self.n_items, self.capacity, 0.5, set.clone())
                .map_err(|e| Error::Config(format!("planted set: {e}")))?;
        }
        Ok(())
    }

    pub fn resolved_epsilon(&self) -> f64 {
        self.epsilon.resolve(self.n_items, self.horizon)
    }

    /// Copy without execution-only fields, as stored in reports.
    fn canonical(&self) -> Self {
        Self {
            parallelism: None,
            output: None,
            ..self.clone()
        }
    }

    fn elevated_sets(&self) -> (ResolvedPrior, Vec<(u64, Assortment)>) {
        let subsets = binomial_saturating(self.n_items, self.capacity);
        let exhaustive = match &self.prior {
            PriorMode::Exhaustive => true,
            PriorMode::Auto => subsets <= EXHAUSTIVE_PRIOR_LIMIT,
            _ => false,
        };
        if exhaustive {
            let sets = all_elevated_sets(self.n_items, self.capacity)
                .enumerate()
                .map(|(d, s)| (seeds::prior_seed(self.seed, d), s))
                .collect();
            return (ResolvedPrior::Exhaustive, sets);
        }
        let sets = (0..self.draws).map(|d| {
            let seed = seeds::prior_seed(self.seed, d);
            let set = match &self.prior {
                PriorMode::Planted(set) => set.clone(),
                _ => sample_elevated_set(self.n_items, self.capacity, &mut ChaCha8Rng::seed_from_u64(seed)),
            };
            (seed, set)
        });
        let resolved = if matches!(self.prior, PriorMode::Planted(_)) {
            ResolvedPrior::Planted
        } else {
            ResolvedPrior::Sampled
        };
        (resolved, sets.collect())
    }
}

fn binomial_saturating(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = match acc.checked_mul(n as u128 - k as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub seed_scheme: String,
}

impl Default for ReportHeader {
    fn default() -> Self {
        Self {
            tool: "mnl-lab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            seed_scheme: seeds::SEED_SCHEME.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DrawRecord {
    pub draw_id: usize,
    pub seed: u64,
    pub elevated_set: Assortment,
    /// Mean over replications.
    pub cum_regret: f64,
    pub replicate_regrets: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub header: ReportHeader,
    pub config: ExperimentConfig,
    pub epsilon: f64,
    pub prior: ResolvedPrior,
    pub mean_regret: f64,
    pub std_error: f64,
    pub draws: Vec<DrawRecord>,
    pub theorem_bound: Option<LowerBoundValue>,
    /// `mean − 2·SE − bound`.
    pub bound_margin: Option<f64>,
    /// Necessary condition for the minimax bound on this prior, not a
    /// measurement of the minimax regret.
    pub consistent: Option<bool>,
    pub notice: Option<String>,
    pub count_audit_failures: usize,
    pub scaling_exponent: Option<f64>,
}

struct TaskOutcome {
    cum_regret: f64,
    counts_ok: bool,
}

fn with_pool<T: Send>(parallelism: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match parallelism {
        None => Ok(job()),
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map(|pool| pool.install(job))
            .map_err(|e| Error::Config(format!("cannot build thread pool: {e}"))),
    }
}

/// Uniform-prior average of cumulative pseudo-regret on planted instances.
pub fn bayes_regret(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let eps = config.resolved_epsilon();
    let (prior, sets) = config.elevated_sets();
    let specs = sets
        .iter()
        .map(|(_, set)| AdversarialSpec::new(config.n_items, config.capacity, eps, set.clone()))
        .collect::<Result<Vec<_>>>()?;
    let tasks: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|d| (0..config.replications).map(move |r| (d, r)))
        .collect();

    let run = |&(d, r): &(usize, usize)| -> Result<TaskOutcome> {
        let env = Environment::planted(&specs[d]);
        let seed = seeds::replication_seed(config.seed, d, r);
        let mut policy = config.policy.build(&PublicView::from(env.instance()), seed)?;
        let (trace, counts) = run_trajectory(policy.as_mut(), &env, config.horizon, seed)?;
        let counts_ok = trajectory_count_audit(&counts, config.horizon, config.capacity)?.pass;
        Ok(TaskOutcome {
            cum_regret: trace.cumulative_regret,
            counts_ok,
        })
    };
    let outcomes: Vec<TaskOutcome> = with_pool(config.parallelism, || {
        tasks.par_iter().map(run).collect::<Result<Vec<_>>>()
    })??;

    let reps = config.replications;
    let draws: Vec<DrawRecord> = sets
        .into_iter()
        .enumerate()
        .map(|(d, (seed, elevated_set))| {
            let replicate_regrets: Vec<f64> = outcomes[d * reps..(d + 1) * reps]
                .iter()
                .map(|o| o.cum_regret)
                .collect();
            DrawRecord {
                draw_id: d,
                seed,
                elevated_set,
                cum_regret: mean(&replicate_regrets),
                replicate_regrets,
            }
        })
        .collect();
    let count_audit_failures = outcomes.iter().filter(|o| !o.counts_ok).count();

    let draw_means: Vec<f64> = draws.iter().map(|d| d.cum_regret).collect();
    let mean_regret = mean(&draw_means);
    let std_error = match prior {
        // the prior average is exact; only replication noise remains
        ResolvedPrior::Exhaustive => {
            let within: f64 = draws.iter().map(|d| sample_variance(&d.replicate_regrets) / reps as f64).sum();
            within.sqrt() / draws.len() as f64
        }
        _ if draws.len() >= 2 => (sample_variance(&draw_means) / draws.len() as f64).sqrt(),
        _ => (sample_variance(&draws[0].replicate_regrets) / reps as f64).sqrt(),
    };

    let (theorem_bound, bound_margin, consistent, notice) = if theorem_applicable(config.n_items, config.capacity) {
        let bound = theorem_lower_bound(config.n_items, config.horizon, config.capacity)?;
        let margin = mean_regret - 2.0 * std_error - bound.value;
        (Some(bound), Some(margin), Some(margin >= 0.0), None)
    } else {
        let msg = format!(
            "theorem comparison skipped: K = {} > N/4 = {}",
            config.capacity,
            config.n_items as f64 / 4.0
        );
        (None, None, None, Some(msg))
    };

    Ok(ExperimentResult {
        header: ReportHeader::default(),
        config: config.canonical(),
        epsilon: eps,
        prior,
        mean_regret,
        std_error,
        draws,
        theorem_bound,
        bound_margin,
        consistent,
        notice,
        count_audit_failures,
        scaling_exponent: None,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub horizon: usize,
    pub epsilon: f64,
    pub mean_regret: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub header: ReportHeader,
    pub config: ExperimentConfig,
    pub points: Vec<ScalingPoint>,
    /// Least-squares slope of `ln(mean regret)` on `ln T`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residuals: Vec<f64>,
    /// Some point had zero regret, so the log-log fit is undefined.
    pub zero_regret: bool,
}

/// Fits the growth exponent of Bayes regret in `T` with `N`, `K` fixed.
///
/// Every horizon reuses the master seed, so the prior draws are shared
/// across points.
pub fn scaling_fit(base: &ExperimentConfig, horizons: &[usize]) -> Result<ScalingReport> {
    let mut distinct = horizons.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 || distinct.len() != horizons.len() {
        return Err(Error::Config(format!(
            "scaling needs at least 3 distinct horizons, got {horizons:?}"
        )));
    }
    let mut points = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let cfg = ExperimentConfig {
            horizon,
            ..base.clone()
        };
        let result = bayes_regret(&cfg)?;
        points.push(ScalingPoint {
            horizon,
            epsilon: result.epsilon,
            mean_regret: result.mean_regret,
            std_error: result.std_error,
        });
    }
    let zero_regret = points.iter().any(|p| p.mean_regret <= 0.0);
    let (slope, intercept, residuals) = if zero_regret {
        (None, None, Vec::new())
    } else {
        let xs: Vec<f64> = points.iter().map(|p| (p.horizon as f64).ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.mean_regret.ln()).collect();
        let (slope, intercept) = least_squares(&xs, &ys);
        let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
        (Some(slope), Some(intercept), residuals)
    };
    Ok(ScalingReport {
        header: ReportHeader::default(),
        config: base.canonical(),
        points,
        slope,
        intercept,
        residuals,
        zero_regret,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub header: ReportHeader,
    pub config: ExperimentConfig,
    pub spec: AdversarialSpec,
    pub trace: RegretTrace,
    pub counts: OfferCounts,
    pub count_audit_pass: bool,
}

/// One trajectory on the first prior draw of `config`.
pub fn simulate(config: &ExperimentConfig) -> Result<TrajectoryReport> {
    config.validate()?;
    let single = ExperimentConfig {
        draws: 1,
        prior: match &config.prior {
            PriorMode::Planted(s) => PriorMode::Planted(s.clone()),
            _ => PriorMode::Sampled,
        },
        ..config.clone()
    };
    let (_, sets) = single.elevated_sets();
    let spec = AdversarialSpec::new(config.n_items, config.capacity, config.resolved_epsilon(), sets[0].1.clone())?;
    let env = Environment::planted(&spec);
    let seed = seeds::replication_seed(config.seed, 0, 0);
    let mut policy = config.policy.build(&PublicView::from(env.instance()), seed)?;
    let (trace, counts) = run_trajectory(policy.as_mut(), &env, config.horizon, seed)?;
    let count_audit_pass = trajectory_count_audit(&counts, config.horizon, config.capacity)?.pass;
    Ok(TrajectoryReport {
        header: ReportHeader::default(),
        config: config.canonical(),
        spec,
        trace,
        counts,
        count_audit_pass,
    })
}

fn set_field(s: &Assortment) -> String {
    let ids: Vec<String> = s.items().iter().map(ToString::to_string).collect();
    ids.join(" ")
}

fn opt_field(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), sig12)
}

impl ReportDocument for ExperimentResult {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["draw_id", "seed", "elevated_set", "cum_regret"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.draws
            .iter()
            .map(|d| {
                vec![
                    d.draw_id.to_string(),
                    d.seed.to_string(),
                    set_field(&d.elevated_set),
                    sig12(d.cum_regret),
                ]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(String, String)> {
        let c = &self.config;
        let mut lines = vec![
            ("experiment".into(), "bayes".into()),
            ("N K T".into(), format!("{} {} {}", c.n_items, c.capacity, c.horizon)),
            ("policy".into(), c.policy.to_string()),
            ("epsilon".into(), sig12(self.epsilon)),
            ("prior".into(), format!("{:?} ({} draws x {} reps)", self.prior, self.draws.len(), c.replications)),
            ("master seed".into(), c.seed.to_string()),
            ("seed scheme".into(), self.header.seed_scheme.clone()),
            ("mean regret".into(), sig12(self.mean_regret)),
            ("std error".into(), sig12(self.std_error)),
            ("theorem bound".into(), opt_field(self.theorem_bound.map(|b| b.value))),
            ("mean - 2se - bound".into(), opt_field(self.bound_margin)),
            (
                "consistent".into(),
                self.consistent.map_or("n/a".into(), |ok| if ok { "PASS" } else { "FAIL" }.into()),
            ),
            ("count audit failures".into(), self.count_audit_failures.to_string()),
        ];
        if let Some(n) = &self.notice {
            lines.push(("notice".into(), n.clone()));
        }
        lines
    }
}

impl ReportDocument for ScalingReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["horizon", "epsilon", "mean_regret", "std_error", "residual"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .enumerate()
            .map(|(idx, p)| {
                vec![
                    p.horizon.to_string(),
                    sig12(p.epsilon),
                    sig12(p.mean_regret),
                    sig12(p.std_error),
                    opt_field(self.residuals.get(idx).copied()),
                ]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(String, String)> {
        let c = &self.config;
        vec![
            ("experiment".into(), "scaling".into()),
            ("N K".into(), format!("{} {}", c.n_items, c.capacity)),
            ("policy".into(), c.policy.to_string()),
            ("epsilon".into(), c.epsilon.to_string()),
            ("master seed".into(), c.seed.to_string()),
            ("seed scheme".into(), self.header.seed_scheme.clone()),
            ("slope".into(), opt_field(self.slope)),
            ("zero regret".into(), self.zero_regret.to_string()),
        ]
    }
}

impl ReportDocument for TrajectoryReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["step", "step_regret", "cumulative_regret"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        let mut running = 0.0;
        self.trace
            .step_regrets
            .iter()
            .enumerate()
            .map(|(t, r)| {
                running += r;
                vec![t.to_string(), sig12(*r), sig12(running)]
            })
            .collect()
    }

    fn summary(&self) -> Vec<(String, String)> {
        vec![
            ("experiment".into(), "simulate".into()),
            ("policy".into(), self.config.policy.to_string()),
            ("elevated set".into(), self.spec.elevated_set().to_string()),
            ("epsilon".into(), sig12(self.spec.epsilon())),
            ("seed".into(), self.trace.seed.to_string()),
            ("cumulative regret".into(), sig12(self.trace.cumulative_regret)),
            ("realized revenue".into(), sig12(self.trace.realized_revenue)),
            ("count audit".into(), if self.count_audit_pass { "PASS" } else { "FAIL" }.into()),
        ]
    }
}
