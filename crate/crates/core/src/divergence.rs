//! KL divergence, total variation and the per-step divergence bound between
//! neighbouring planted parameterisations, plus auditors that recompute the
//! lower-bound chain as signed margins.
//!
//! All logarithms are natural, so divergences are in nats.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversarial::{check_epsilon, epsilon_schedule, planted_preferences, theorem_applicable, theorem_lower_bound};
use crate::mnl::Assortment;
use crate::runner::report::sig12;
use crate::runner::OfferCounts;
use crate::{Error, Result};

/// Checks pass when their signed margin is at least `-MARGIN_TOLERANCE`.
pub const MARGIN_TOLERANCE: f64 = 1e-12;

/// Per-round KL constant: `KL ≤ 63ε²/K` for every offered set containing the
/// distinguishing item.
pub const STEP_KL_CONSTANT: f64 = 63.0;

const SUM_TOLERANCE: f64 = 1e-12;

/// Two categorical laws over the same outcomes `0..=J`, all entries positive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoricalPair {
    p: Vec<f64>,
    q: Vec<f64>,
}

impl CategoricalPair {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if p.is_empty() || p.len() != q.len() {
            return Err(Error::Domain(format!(
                "laws must be non-empty and of equal length (got {} and {})",
                p.len(),
                q.len()
            )));
        }
        for (name, law) in [("p", &p), ("q", &q)] {
            if let Some((j, x)) = law.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x <= 1.0)) {
                return Err(Error::Domain(format!("{name}[{j}] = {x} is not in (0, 1]")));
            }
            let total: f64 = law.iter().sum();
            if (total - 1.0).abs() > SUM_TOLERANCE {
                return Err(Error::Domain(format!("{name} sums to {total}")));
            }
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    fn zipped(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.p.iter().copied().zip(self.q.iter().copied())
    }
}

/// `Σ p_j ln(p_j / q_j)`.
pub fn kl_exact(pair: &CategoricalPair) -> f64 {
    pair.zipped().map(|(p, q)| p * (p / q).ln()).sum()
}

/// `Σ (p_j − q_j)² / q_j`, which dominates [`kl_exact`] since `ln(1+x) ≤ x`.
pub fn kl_quadratic_bound(pair: &CategoricalPair) -> f64 {
    pair.zipped().map(|(p, q)| (p - q) * (p - q) / q).sum()
}

pub fn tv_distance(pair: &CategoricalPair) -> f64 {
    0.5 * pair.zipped().map(|(p, q)| (p - q).abs()).sum::<f64>()
}

/// Seeded corpus of random pairs with dimensions in `2..=50` and every entry
/// at least `1e-3`.
pub fn random_pair_corpus(count: usize, seed: u64) -> Vec<CategoricalPair> {
    const FLOOR: f64 = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let law = |rng: &mut ChaCha8Rng, dim: usize| {
        let raw: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() + f64::MIN_POSITIVE).collect();
        let total: f64 = raw.iter().sum();
        let free = 1.0 - FLOOR * dim as f64;
        let mut law: Vec<f64> = raw.iter().map(|w| FLOOR + free * w / total).collect();
        // push the rounding residue onto the largest entry
        let residue = 1.0 - law.iter().sum::<f64>();
        let top = (0..dim).max_by(|&a, &b| law[a].total_cmp(&law[b])).unwrap();
        law[top] += residue;
        law
    };
    (0..count)
        .map(|_| {
            let dim = rng.random_range(2..=50);
            let p = law(&mut rng, dim);
            let q = law(&mut rng, dim);
            CategoricalPair::new(p, q).expect("corpus laws are valid")
        })
        .collect()
}

/// One audited inequality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub name: String,
    pub exact: f64,
    pub bound: f64,
    /// Nonnegative when the inequality holds.
    pub margin: f64,
    pub pass: bool,
}

impl AuditCheck {
    pub fn at_most(name: impl Into<String>, exact: f64, bound: f64) -> Self {
        Self::with_margin(name, exact, bound, bound - exact)
    }

    pub fn at_least(name: impl Into<String>, exact: f64, bound: f64) -> Self {
        Self::with_margin(name, exact, bound, exact - bound)
    }

    /// Equality check; the margin is `−|exact − bound|`.
    pub fn equal(name: impl Into<String>, exact: f64, bound: f64) -> Self {
        Self::with_margin(name, exact, bound, -(exact - bound).abs())
    }

    fn with_margin(name: impl Into<String>, exact: f64, bound: f64, margin: f64) -> Self {
        Self {
            name: name.into(),
            exact,
            bound,
            margin,
            pass: margin >= -MARGIN_TOLERANCE,
        }
    }
}

/// Reduces many checks of one kind to the one with the smallest margin.
pub(crate) fn worst(name: &str, checks: impl IntoIterator<Item = AuditCheck>) -> Option<AuditCheck> {
    checks
        .into_iter()
        .min_by(|a, b| a.margin.total_cmp(&b.margin))
        .map(|mut c| {
            c.name = name.to_string();
            c
        })
}

/// A non-gating value reported alongside the checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub title: String,
    /// Number of individual cases behind the checks.
    pub cases: usize,
    pub checks: Vec<AuditCheck>,
    pub diagnostics: Vec<Diagnostic>,
    pub pass: bool,
}

impl AuditReport {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            pass: true,
            ..Default::default()
        }
    }

    pub fn push(&mut self, check: AuditCheck) {
        self.pass &= check.pass;
        self.checks.push(check);
    }

    pub fn diagnose(&mut self, name: impl Into<String>, value: f64) {
        self.diagnostics.push(Diagnostic {
            name: name.into(),
            value,
        });
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// One row per check: name, exact, bound, margin, PASS/FAIL.
    pub fn to_table(&self) -> String {
        let mut rows = vec![[
            "check".to_string(),
            "exact".to_string(),
            "bound".to_string(),
            "margin".to_string(),
            "status".to_string(),
        ]];
        for c in &self.checks {
            rows.push([
                c.name.clone(),
                sig12(c.exact),
                sig12(c.bound),
                sig12(c.margin),
                if c.pass { "PASS" } else { "FAIL" }.to_string(),
            ]);
        }
        let mut widths = [0usize; 5];
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let mut out = format!("== {} ({} cases) ==\n", self.title, self.cases);
        for row in &rows {
            let line: Vec<String> = row
                .iter()
                .zip(widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(line.join("  ").trim_end());
            out.push('\n');
        }
        for d in &self.diagnostics {
            out.push_str(&format!("  note {} = {}\n", d.name, sig12(d.value)));
        }
        out.push_str(if self.pass { "result: PASS\n" } else { "result: FAIL\n" });
        out
    }
}

/// Offered set and neighbouring pair `S′` vs `S′ ∪ {item}` for one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepKlContext {
    epsilon: f64,
    capacity: usize,
    item: usize,
    offered: Assortment,
    elevated_base: Assortment,
}

impl StepKlContext {
    pub fn new(
        epsilon: f64,
        capacity: usize,
        item: usize,
        offered: Assortment,
        elevated_base: Assortment,
    ) -> Result<Self> {
        check_epsilon(epsilon)?;
        if capacity == 0 || item == 0 {
            return Err(Error::Domain("capacity and item id must be positive".into()));
        }
        if elevated_base.len() + 1 != capacity {
            return Err(Error::Domain(format!(
                "base set must have K-1 = {} items, got {}",
                capacity - 1,
                elevated_base.len()
            )));
        }
        if elevated_base.contains(item) {
            return Err(Error::Domain(format!("item {item} already in the base set")));
        }
        if offered.len() > capacity {
            return Err(Error::CapacityViolation {
                size: offered.len(),
                capacity,
            });
        }
        Ok(Self {
            epsilon,
            capacity,
            item,
            offered,
            elevated_base,
        })
    }

    /// `K′ = |S_t|`.
    pub fn k_prime(&self) -> usize {
        self.offered.len()
    }

    /// `J = |S_t ∩ S′|`.
    pub fn j_overlap(&self) -> usize {
        self.offered.overlap(&self.elevated_base)
    }

    /// `a = 1 + K′/K`.
    pub fn a(&self) -> f64 {
        1.0 + self.k_prime() as f64 / self.capacity as f64
    }

    fn n_items(&self) -> usize {
        let top = |s: &Assortment| s.items().last().copied().unwrap_or(0);
        top(&self.offered).max(top(&self.elevated_base)).max(self.item)
    }

    /// Conditional purchase laws under `S′` and `S′ ∪ {item}`, outcomes
    /// ordered no-purchase first then offered items by id.
    pub fn conditional_laws(&self) -> CategoricalPair {
        let n = self.n_items();
        let base = planted_preferences(n, self.capacity, self.epsilon, &self.elevated_base);
        let mut extended = self.elevated_base.items().to_vec();
        extended.push(self.item);
        extended.sort_unstable();
        let raised = planted_preferences(n, self.capacity, self.epsilon, &Assortment::from_sorted(extended));
        let law = |prefs: &[f64]| {
            let denom = self.offered.items().iter().fold(1.0, |acc, &i| acc + prefs[i - 1]);
            std::iter::once(1.0 / denom)
                .chain(self.offered.items().iter().map(|&i| prefs[i - 1] / denom))
                .collect::<Vec<_>>()
        };
        CategoricalPair {
            p: law(&base),
            q: law(&raised),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepKl {
    pub exact: f64,
    /// `63ε²/K`.
    pub bound: f64,
    pub quadratic: f64,
    pub coord_margins: Vec<AuditCheck>,
    pub note: Option<String>,
}

/// Exact one-round KL between the neighbouring laws, the `63ε²/K` bound and
/// the coordinate-wise bounds used to derive it.
pub fn per_step_kl(ctx: &StepKlContext) -> StepKl {
    let eps = ctx.epsilon;
    let k = ctx.capacity as f64;
    let bound = STEP_KL_CONSTANT * eps * eps / k;
    if !ctx.offered.contains(ctx.item) {
        return StepKl {
            exact: 0.0,
            bound,
            quadratic: 0.0,
            coord_margins: Vec::new(),
            note: Some(format!(
                "item {} not offered: conditional laws coincide",
                ctx.item
            )),
        };
    }
    let pair = ctx.conditional_laws();
    let (p, q) = (pair.p(), pair.q());

    let mut coords = vec![
        AuditCheck::at_most("no_purchase_diff", (p[0] - q[0]).abs(), eps / k),
        AuditCheck::at_least("no_purchase_floor", q[0], 1.0 / 3.0),
    ];
    let mut others = Vec::new();
    let mut floors = Vec::new();
    for (slot, &j) in ctx.offered.items().iter().enumerate() {
        let (pj, qj) = (p[slot + 1], q[slot + 1]);
        if j == ctx.item {
            coords.push(AuditCheck::at_most("distinguished_diff", (pj - qj).abs(), 4.0 * eps / k));
        } else {
            others.push(AuditCheck::at_most("other_diff", (pj - qj).abs(), 2.0 * eps / (k * k)));
        }
        floors.push(AuditCheck::at_least("item_floor", qj, 1.0 / (3.0 * k)));
    }
    coords.push(
        worst("other_diff", others)
            .unwrap_or_else(|| AuditCheck::at_most("other_diff", 0.0, 2.0 * eps / (k * k))),
    );
    coords.extend(worst("item_floor", floors));

    StepKl {
        exact: kl_exact(&pair),
        bound,
        quadratic: kl_quadratic_bound(&pair),
        coord_margins: coords,
        note: None,
    }
}

/// `T·√(KL/2)`: ceiling on `|E_P[Ñ_i] − E_Q[Ñ_i]|` for a count bounded by `T`.
pub fn pinsker_count_gap(horizon: usize, kl: f64) -> Result<f64> {
    if kl.is_nan() || kl < 0.0 {
        return Err(Error::Domain(format!("KL divergence {kl} is negative")));
    }
    Ok(horizon as f64 * (kl / 2.0).sqrt())
}

fn binomial(n: usize, k: usize) -> BigUint {
    (1..=k).fold(BigUint::from(1u32), |acc, i| acc * BigUint::from(n - k + i) / BigUint::from(i))
}

/// Recomputes the lower-bound assembly for one `(N, T, K, ε)`.
///
/// Every relaxation is checked against the sharp quantity it replaces, and
/// the sharp quantity is what flows into the next step. The bracket obtained
/// by instead carrying the relaxed `126Tε²/N` average forward is reported as
/// a diagnostic.
pub fn proof_chain_audit(n_items: usize, horizon: usize, capacity: usize, epsilon: f64) -> Result<AuditReport> {
    if capacity == 0 || horizon == 0 {
        return Err(Error::Domain("T and K must be positive".into()));
    }
    if !theorem_applicable(n_items, capacity) {
        return Err(Error::NotApplicable { n_items, capacity });
    }
    check_epsilon(epsilon)?;
    let (n, t, k, eps) = (n_items as f64, horizon as f64, capacity as f64, epsilon);
    let spread = (n_items - capacity + 1) as f64;
    let mut report = AuditReport::new(format!(
        "lower-bound chain N={n_items} T={horizon} K={capacity} eps={}",
        sig12(eps)
    ));

    // Average exposure of non-elevated items under S′ is at most TK/(N−K+1).
    let first_term = t * k / spread;
    report.push(AuditCheck::at_most("capacity_ratio_le_T_over_3", first_term, t / 3.0));

    // |S_{K−1}| / (K |S_K|) = 1/(N−K+1) in exact integers.
    let lower = binomial(n_items, capacity - 1);
    let upper = BigUint::from(capacity) * binomial(n_items, capacity);
    let quotient = &upper / &lower;
    let exact_ratio = match (u64::try_from(&quotient), (&upper % &lower) == BigUint::ZERO) {
        (Ok(q), true) => 1.0 / q as f64,
        _ => f64::NAN,
    };
    let identity_holds = quotient == BigUint::from(n_items - capacity + 1) && &upper % &lower == BigUint::ZERO;
    report.push(AuditCheck {
        name: "binomial_identity".into(),
        exact: exact_ratio,
        bound: 1.0 / spread,
        margin: if identity_holds { 0.0 } else { -1.0 },
        pass: identity_holds,
    });

    // Σ_{i∉S′} KL ≤ (63ε²/K)·Σ E[N_i] ≤ 63ε²T; averaged over N−K+1 items.
    let kl_average = STEP_KL_CONSTANT * eps * eps * t / spread;
    let kl_average_relaxed = 2.0 * STEP_KL_CONSTANT * t * eps * eps / n;
    report.push(AuditCheck::at_most("kl_average_le_126_T_eps2_over_N", kl_average, kl_average_relaxed));

    let subtracted = t * (kl_average / 2.0).sqrt();
    let bracket = t - first_term - subtracted;
    report.push(AuditCheck::at_least("bracket_ge_T_over_3", bracket, t / 3.0));

    let chain_value = eps / 9.0 * bracket;
    let target = eps * t / 27.0;
    report.push(AuditCheck::at_least("chain_ge_eps_T_over_27", chain_value, target));

    let bound = theorem_lower_bound(n_items, horizon, capacity)?.value;
    let scheduled = epsilon_schedule(n_items, horizon);
    if (eps - scheduled).abs() <= 1e-15 {
        report.push(AuditCheck::at_least("eps_T_over_27_ge_theorem_bound", target, bound));
    } else {
        report.diagnose("scheduled_epsilon", scheduled);
    }

    report.diagnose("chain_value", chain_value);
    report.diagnose(
        "bracket_over_T_with_126_relaxation",
        2.0 / 3.0 - (kl_average_relaxed / 2.0).sqrt(),
    );

    audit_kl_collection(&mut report, n_items, horizon, capacity, eps);
    report.cases = report.checks.len();
    Ok(report)
}

/// Trajectory-level KL collection for a fixed offer schedule, where the
/// divergence is exactly `T` times the one-round value.
fn audit_kl_collection(report: &mut AuditReport, n_items: usize, horizon: usize, capacity: usize, eps: f64) {
    let t = horizon as f64;
    let base = Assortment::first(capacity - 1);
    let shift = capacity / 2;
    let offered = Assortment::from_sorted((shift + 1..=shift + capacity).collect());
    let per_item_bound = STEP_KL_CONSTANT * eps * eps / capacity as f64;

    let mut kls = Vec::new();
    let mut exposure_checks = Vec::new();
    for item in (1..=n_items).filter(|&i| !base.contains(i)) {
        let ctx = StepKlContext::new(eps, capacity, item, offered.clone(), base.clone())
            .expect("collection contexts are valid");
        let exposure = if offered.contains(item) { t } else { 0.0 };
        let kl = t * per_step_kl(&ctx).exact;
        exposure_checks.push(AuditCheck::at_most("", kl, exposure * per_item_bound));
        kls.push(kl);
    }
    report.extend_worst("trajectory_kl_le_exposure_times_step_bound", exposure_checks);

    let m = kls.len() as f64;
    let mean_sqrt = kls.iter().map(|kl| (kl / 2.0).sqrt()).sum::<f64>() / m;
    let sqrt_mean = (kls.iter().sum::<f64>() / m / 2.0).sqrt();
    report.push(AuditCheck::at_most("jensen_mean_sqrt_le_sqrt_mean", mean_sqrt, sqrt_mean));
    report.push(AuditCheck::at_most(
        "kl_collection_le_63_eps2_T",
        kls.iter().sum(),
        STEP_KL_CONSTANT * eps * eps * t,
    ));
}

impl AuditReport {
    fn extend_worst(&mut self, name: &str, checks: Vec<AuditCheck>) {
        if let Some(c) = worst(name, checks) {
            self.push(c);
        }
    }
}

/// Count identities of one trajectory: `Σ Ñ_i = TK`, `N_i ≤ Ñ_i`, `Σ N_i ≤ TK`.
pub fn trajectory_count_audit(counts: &OfferCounts, horizon: usize, capacity: usize) -> Result<AuditReport> {
    let (raw, padded) = (&counts.n_raw, &counts.n_padded);
    if raw.is_empty() || raw.len() != padded.len() {
        return Err(Error::Domain(format!(
            "malformed counts: {} raw vs {} padded entries",
            raw.len(),
            padded.len()
        )));
    }
    let budget = horizon as u64 * capacity as u64;
    let padded_total: u64 = padded.iter().sum();
    let raw_total: u64 = raw.iter().sum();
    let mut report = AuditReport::new(format!("offer counts T={horizon} K={capacity}"));
    report.cases = raw.len();
    report.push(AuditCheck {
        name: "padded_total_eq_TK".into(),
        exact: padded_total as f64,
        bound: budget as f64,
        margin: if padded_total == budget { 0.0 } else { -((padded_total.abs_diff(budget)) as f64) },
        pass: padded_total == budget,
    });
    let worst_item = raw
        .iter()
        .zip(padded)
        .min_by_key(|&(&r, &p)| p as i128 - r as i128)
        .expect("non-empty");
    let slack = *worst_item.1 as i128 - *worst_item.0 as i128;
    report.push(AuditCheck {
        name: "raw_le_padded_per_item".into(),
        exact: *worst_item.0 as f64,
        bound: *worst_item.1 as f64,
        margin: slack as f64,
        pass: slack >= 0,
    });
    report.push(AuditCheck {
        name: "raw_total_le_TK".into(),
        exact: raw_total as f64,
        bound: budget as f64,
        margin: budget as f64 - raw_total as f64,
        pass: raw_total <= budget,
    });
    Ok(report)
}
