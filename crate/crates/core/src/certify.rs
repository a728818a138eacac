//! Grid and corpus sweeps that certify the inequalities behind the lower
//! bound. Each sweep reduces to one [`AuditReport`] holding the worst margin
//! per inequality.

use crate::adversarial::{build_instance, single_stage_gap, planted_optimum_value, AdversarialSpec};
use crate::divergence::{
    kl_exact, kl_quadratic_bound, per_step_kl, proof_chain_audit, random_pair_corpus, tv_distance, worst,
    AuditCheck, AuditReport, CategoricalPair, StepKlContext,
};
use crate::mnl::{expected_revenue, Assortment};
use crate::policy::{PolicySpec, PublicView};
use crate::runner::report::{sig12, ReportDocument};
use crate::runner::{run_trajectory, seeds, Environment, ReportHeader};
use crate::Result;

/// Seed of the default random pair corpus.
pub const CORPUS_SEED: u64 = 0xA55;
pub const CORPUS_SIZE: usize = 1000;

/// `ε ∈ {0.01, 0.02, …, 0.5}`.
pub fn gap_epsilon_grid() -> Vec<f64> {
    (1..=50).map(|i| i as f64 / 100.0).collect()
}

/// `ε ∈ {0.05, 0.10, …, 0.5}`.
pub fn step_kl_epsilon_grid() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 20.0).collect()
}

pub const STEP_KL_CAPACITIES: [usize; 4] = [2, 5, 10, 20];

/// Environment-measured single-round gap versus the closed form and the
/// `δε/9` floor. `δ` runs over `{0, 1/K, …, 1}` on planted instances with
/// `N = 2K` so every overlap level is realisable.
pub fn gap_certificate(epsilons: &[f64], capacity: usize) -> Result<AuditReport> {
    let n = 2 * capacity;
    let planted = Assortment::first(capacity);
    let mut report = AuditReport::new(format!("single-round gap, K={capacity}"));
    let (mut agreement, mut floor, mut optimum) = (Vec::new(), Vec::new(), Vec::new());
    for &eps in epsilons {
        let spec = AdversarialSpec::new(n, capacity, eps, planted.clone())?;
        let instance = build_instance(&spec);
        let best = expected_revenue(&instance, &planted)?;
        optimum.push(AuditCheck::equal("", best, planted_optimum_value(eps)));
        for swapped in 0..=capacity {
            // keep the first K − m planted items, add m from the other half
            let items: Vec<usize> = (1..=capacity - swapped)
                .chain(capacity + 1..=capacity + swapped)
                .collect();
            let offered = Assortment::new(items)?;
            let measured = best - expected_revenue(&instance, &offered)?;
            let gap = single_stage_gap(eps, swapped as f64 / capacity as f64)?;
            agreement.push(AuditCheck::equal("", measured, gap.exact_gap));
            floor.push(AuditCheck::at_least("", measured, gap.lower_bound_gap));
            report.cases += 1;
        }
    }
    for (name, checks) in [
        ("planted_optimum_closed_form", optimum),
        ("measured_gap_eq_closed_form", agreement),
        ("measured_gap_ge_delta_eps_over_9", floor),
    ] {
        report.extend(worst(name, checks));
    }
    Ok(report)
}

pub fn quadratic_kl_certificate(corpus: &[CategoricalPair]) -> AuditReport {
    let mut report = AuditReport::new("quadratic KL bound");
    report.cases = corpus.len();
    report.extend(worst(
        "kl_le_sum_sq_diff_over_q",
        corpus
            .iter()
            .map(|pq| AuditCheck::at_most("", kl_exact(pq), kl_quadratic_bound(pq))),
    ));
    report.extend(worst(
        "kl_nonnegative",
        corpus.iter().map(|pq| AuditCheck::at_least("", kl_exact(pq), 0.0)),
    ));
    report
}

pub fn pinsker_certificate(corpus: &[CategoricalPair]) -> AuditReport {
    let mut report = AuditReport::new("Pinsker inequality");
    report.cases = corpus.len();
    report.extend(worst(
        "tv_le_sqrt_half_kl",
        corpus
            .iter()
            .map(|pq| AuditCheck::at_most("", tv_distance(pq), (kl_exact(pq) / 2.0).sqrt())),
    ));
    report
}

/// Every `(K′, J)` with the distinguished item offered, plus one context
/// where it is not.
pub fn step_contexts(capacity: usize, epsilon: f64) -> Vec<StepKlContext> {
    let base = Assortment::first(capacity - 1);
    let item = capacity;
    let mut out = Vec::new();
    for k_prime in 1..=capacity {
        for j in 0..=(k_prime - 1).min(capacity - 1) {
            let fresh = k_prime - 1 - j;
            let mut offered: Vec<usize> = (1..=j).collect();
            offered.push(item);
            offered.extend(capacity + 1..=capacity + fresh);
            let ctx = StepKlContext::new(epsilon, capacity, item, Assortment::new(offered).unwrap(), base.clone())
                .expect("grid contexts are valid");
            out.push(ctx);
        }
    }
    let without_item = Assortment::new((capacity + 1..=2 * capacity).collect()).unwrap();
    out.push(StepKlContext::new(epsilon, capacity, item, without_item, base).expect("valid"));
    out
}

pub fn step_kl_certificate(capacities: &[usize], epsilons: &[f64]) -> AuditReport {
    let mut report = AuditReport::new("per-round KL bound");
    let mut by_name: Vec<(String, Vec<AuditCheck>)> = Vec::new();
    let mut record = |check: AuditCheck| match by_name.iter_mut().find(|(n, _)| *n == check.name) {
        Some((_, v)) => v.push(check),
        None => by_name.push((check.name.clone(), vec![check])),
    };
    for &k in capacities {
        for &eps in epsilons {
            for ctx in step_contexts(k, eps) {
                let step = per_step_kl(&ctx);
                record(AuditCheck::at_most("step_kl_le_63_eps2_over_K", step.exact, step.bound));
                record(AuditCheck::at_most("step_kl_le_quadratic", step.exact, step.quadratic));
                step.coord_margins.into_iter().for_each(&mut record);
                report.cases += 1;
            }
        }
    }
    for (name, checks) in by_name {
        report.extend(worst(&name, checks));
    }
    report
}

/// The `(N, T, K)` points audited by default.
pub const CHAIN_POINTS: [(usize, usize, usize); 3] = [(16, 1024, 4), (100, 40_000, 25), (400, 1_000_000, 100)];

/// Count identities on simulated trajectories from a rotation of policies.
pub fn trajectory_count_certificate(
    n_items: usize,
    capacity: usize,
    horizon: usize,
    trajectories: usize,
    seed: u64,
) -> Result<AuditReport> {
    let rotation: Vec<PolicySpec> = vec![
        PolicySpec::EpochUcb {
            constants: Default::default(),
        },
        PolicySpec::Random { seed: 0 },
        PolicySpec::Fixed {
            items: Assortment::first(capacity),
        },
        PolicySpec::Fixed {
            items: Assortment::new(vec![n_items])?,
        },
    ];
    let eps = crate::adversarial::epsilon_schedule(n_items, horizon);
    let mut report = AuditReport::new(format!("count identities, N={n_items} K={capacity} T={horizon}"));
    let mut by_name: Vec<(String, Vec<AuditCheck>)> = Vec::new();
    for trial in 0..trajectories {
        let stream = seeds::replication_seed(seed, trial, 0);
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(stream);
        let elevated = crate::adversarial::sample_elevated_set(n_items, capacity, &mut rng);
        let env = Environment::planted(&AdversarialSpec::new(n_items, capacity, eps, elevated)?);
        let mut policy = rotation[trial % rotation.len()].build(&PublicView::from(env.instance()), stream)?;
        let (trace, counts) = run_trajectory(policy.as_mut(), &env, horizon, seeds::mix(stream, 1))?;
        let audit = crate::divergence::trajectory_count_audit(&counts, horizon, capacity)?;
        let lowest = trace.step_regrets.iter().copied().fold(f64::INFINITY, f64::min);
        let checks = audit
            .checks
            .into_iter()
            .chain(std::iter::once(AuditCheck::at_least("step_regret_nonnegative", lowest, 0.0)));
        for check in checks {
            match by_name.iter_mut().find(|(n, _)| *n == check.name) {
                Some((_, v)) => v.push(check),
                None => by_name.push((check.name.clone(), vec![check])),
            }
        }
        report.cases += 1;
    }
    for (name, checks) in by_name {
        report.extend(worst(&name, checks));
    }
    Ok(report)
}

/// Every certificate of one `verify` run.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SuiteReport {
    pub header: ReportHeader,
    pub reports: Vec<AuditReport>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn new(reports: Vec<AuditReport>) -> Self {
        let pass = reports.iter().all(|r| r.pass);
        Self {
            header: ReportHeader::default(),
            reports,
            pass,
        }
    }
}

impl ReportDocument for SuiteReport {
    fn csv_header(&self) -> Vec<&'static str> {
        vec!["audit", "check", "exact", "bound", "margin", "status"]
    }

    fn csv_rows(&self) -> Vec<Vec<String>> {
        self.reports
            .iter()
            .flat_map(|r| {
                r.checks.iter().map(|c| {
                    vec![
                        r.title.clone(),
                        c.name.clone(),
                        sig12(c.exact),
                        sig12(c.bound),
                        sig12(c.margin),
                        if c.pass { "PASS" } else { "FAIL" }.to_string(),
                    ]
                })
            })
            .collect()
    }

    fn summary(&self) -> Vec<(String, String)> {
        let mut lines: Vec<(String, String)> = self
            .reports
            .iter()
            .map(|r| (r.title.clone(), format!("{} ({} cases)", if r.pass { "PASS" } else { "FAIL" }, r.cases)))
            .collect();
        lines.push(("result".into(), if self.pass { "PASS" } else { "FAIL" }.into()));
        lines
    }
}

/// All certificates with their default grids.
pub fn standard_suite() -> Result<Vec<AuditReport>> {
    let corpus = random_pair_corpus(CORPUS_SIZE, CORPUS_SEED);
    let mut reports = vec![
        gap_certificate(&gap_epsilon_grid(), 20)?,
        quadratic_kl_certificate(&corpus),
        step_kl_certificate(&STEP_KL_CAPACITIES, &step_kl_epsilon_grid()),
        pinsker_certificate(&corpus),
    ];
    for (n, t, k) in CHAIN_POINTS {
        reports.push(proof_chain_audit(n, t, k, crate::adversarial::epsilon_schedule(n, t))?);
    }
    reports.push(trajectory_count_certificate(16, 4, 1024, 20, 0)?);
    Ok(reports)
}

impl Extend<AuditCheck> for AuditReport {
    fn extend<I: IntoIterator<Item = AuditCheck>>(&mut self, iter: I) {
        for c in iter {
            self.push(c);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_grid_covers_all_overlaps() {
        let ctxs = step_contexts(5, 0.25);
        // Σ_{K′=1}^{5} K′ offered contexts plus one without the item
        assert_eq!(ctxs.len(), 15 + 1);
        assert!(ctxs.iter().all(|c| c.j_overlap() <= 4 && c.k_prime() <= 5));
        assert!(ctxs.iter().any(|c| c.k_prime() == 5 && c.j_overlap() == 4));
    }

    #[test]
    fn gap_floor_is_tight_at_zero_overlap() {
        let report = gap_certificate(&[0.05, 0.5], 4).unwrap();
        assert!(report.pass);
        assert_eq!(report.cases, 10);
        // δ = 0 rows have a zero floor margin; the worst is exactly 0
        let floor = report
            .checks
            .iter()
            .find(|c| c.name == "measured_gap_ge_delta_eps_over_9")
            .unwrap();
        assert!(floor.margin.abs() < 1e-15);
    }

    #[test]
    fn small_suites_pass() {
        let corpus = random_pair_corpus(50, 7);
        assert!(quadratic_kl_certificate(&corpus).pass);
        assert!(pinsker_certificate(&corpus).pass);
        assert!(step_kl_certificate(&[2, 3], &[0.1, 0.5]).pass);
    }

    #[test]
    fn count_certificate_covers_every_policy() {
        let report = trajectory_count_certificate(8, 2, 64, 8, 1).unwrap();
        assert!(report.pass);
        assert_eq!(report.cases, 8);
        assert_eq!(report.checks.len(), 4);
    }

    #[test]
    fn suite_csv_has_one_row_per_check() {
        let suite = SuiteReport::new(vec![pinsker_certificate(&random_pair_corpus(5, 1))]);
        assert!(suite.pass);
        assert_eq!(suite.csv_rows().len(), 1);
        assert_eq!(suite.csv_rows()[0][0], "Pinsker inequality");
    }
}
