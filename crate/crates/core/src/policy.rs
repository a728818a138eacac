//! Assortment-selection policies.
//!
//! Policies only ever see a [`PublicView`] (item count, capacity, revenues)
//! and the observations fed back to them; preference parameters are never
//! reachable from here.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::adversarial::sample_elevated_set;
use crate::mnl::{best_by_enumeration, Assortment, MnlInstance, Outcome};
use crate::{Error, Result};

/// What a policy is allowed to know about the environment.
#[derive(Clone, Copy, Debug)]
pub struct PublicView<'a> {
    pub n_items: usize,
    pub capacity: usize,
    pub revenues: &'a [f64],
}

impl<'a> From<&'a MnlInstance> for PublicView<'a> {
    fn from(instance: &'a MnlInstance) -> Self {
        Self {
            n_items: instance.n_items(),
            capacity: instance.capacity(),
            revenues: instance.revenues(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observation {
    pub offered: Assortment,
    pub outcome: Outcome,
    pub step: usize,
}

pub trait Policy: Send {
    fn name(&self) -> &'static str;

    fn act(&mut self, view: &PublicView<'_>) -> Result<Assortment>;

    fn observe(&mut self, obs: &Observation) -> Result<()>;
}

/// Rejects feedback for an assortment other than the one last emitted.
fn check_protocol(last: &Option<Assortment>, obs: &Observation) -> Result<()> {
    match last {
        Some(emitted) if *emitted == obs.offered => {}
        Some(emitted) => {
            return Err(Error::Protocol(format!(
                "observation at step {} is for {} but the policy offered {emitted}",
                obs.step, obs.offered
            )))
        }
        None => {
            return Err(Error::Protocol(format!(
                "observation at step {} before any assortment was offered",
                obs.step
            )))
        }
    }
    match obs.outcome {
        Outcome::Item(i) if !obs.offered.contains(i) => Err(Error::Protocol(format!(
            "outcome {i} was not offered in {}",
            obs.offered
        ))),
        _ => Ok(()),
    }
}

/// Always offers the same set.
#[derive(Clone, Debug)]
pub struct FixedPolicy {
    target: Assortment,
    last: Option<Assortment>,
}

impl FixedPolicy {
    pub fn new(target: Assortment) -> Self {
        Self { target, last: None }
    }
}

impl Policy for FixedPolicy {
    fn name(&self) -> &'static str {
        "fixed"
    }

    fn act(&mut self, _view: &PublicView<'_>) -> Result<Assortment> {
        self.last = Some(self.target.clone());
        Ok(self.target.clone())
    }

    fn observe(&mut self, obs: &Observation) -> Result<()> {
        check_protocol(&self.last, obs)
    }
}

/// Offers a fresh uniformly random size-`K` set every round.
#[derive(Clone, Debug)]
pub struct RandomPolicy {
    rng: ChaCha8Rng,
    last: Option<Assortment>,
}

impl RandomPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            last: None,
        }
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &'static str {
        "random"
    }

    fn act(&mut self, view: &PublicView<'_>) -> Result<Assortment> {
        let s = sample_elevated_set(view.n_items, view.capacity, &mut self.rng);
        self.last = Some(s.clone());
        Ok(s)
    }

    fn observe(&mut self, obs: &Observation) -> Result<()> {
        check_protocol(&self.last, obs)
    }
}

/// Confidence constants of the optimistic index
/// `v̂ + √(c₁·v̂·log(√N·ℓ+1)/Tᵢ) + c₂·log(√N·ℓ+1)/Tᵢ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UcbConstants {
    pub sqrt_coef: f64,
    pub lin_coef: f64,
}

impl Default for UcbConstants {
    fn default() -> Self {
        Self {
            sqrt_coef: 48.0,
            lin_coef: 48.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct ItemStats {
    epochs_offered: u64,
    purchases: u64,
    v_hat: f64,
    v_ucb: f64,
}

/// Epoch-based UCB: an assortment is held until the first no-purchase, and
/// the number of purchases of item `i` during such an epoch is an unbiased
/// estimate of `vᵢ`.
#[derive(Clone, Debug)]
pub struct EpochUcb {
    constants: UcbConstants,
    n_items: usize,
    stats: Vec<ItemStats>,
    /// Completed epochs (ℓ).
    epochs: u64,
    current: Option<Assortment>,
    tally: Vec<u64>,
}

impl EpochUcb {
    pub fn new(n_items: usize, constants: UcbConstants) -> Self {
        let unseen = ItemStats {
            v_ucb: f64::INFINITY,
            ..Default::default()
        };
        Self {
            constants,
            n_items,
            stats: vec![unseen; n_items],
            epochs: 0,
            current: None,
            tally: vec![0; n_items],
        }
    }

    pub fn epoch_index(&self) -> u64 {
        self.epochs
    }

    pub fn current_epoch(&self) -> Option<&Assortment> {
        self.current.as_ref()
    }

    pub fn epochs_offered(&self, item: usize) -> u64 {
        self.stats[item - 1].epochs_offered
    }

    pub fn v_hat(&self, item: usize) -> f64 {
        self.stats[item - 1].v_hat
    }

    pub fn v_ucb(&self, item: usize) -> f64 {
        self.stats[item - 1].v_ucb
    }

    pub fn ucb_weights(&self) -> Vec<f64> {
        self.stats.iter().map(|s| s.v_ucb).collect()
    }

    /// Exploration bonus for an item seen in `epochs_offered` epochs.
    pub fn bonus(&self, v_hat: f64, epochs_offered: u64) -> f64 {
        let t = epochs_offered as f64;
        let log_term = ((self.n_items as f64).sqrt() * self.epochs as f64 + 1.0).ln();
        (self.constants.sqrt_coef * v_hat * log_term / t).sqrt() + self.constants.lin_coef * log_term / t
    }

    fn close_epoch(&mut self, offered: &Assortment) {
        self.epochs += 1;
        for &i in offered.items() {
            let s = &mut self.stats[i - 1];
            s.epochs_offered += 1;
            s.purchases += self.tally[i - 1];
            s.v_hat = s.purchases as f64 / s.epochs_offered as f64;
            self.tally[i - 1] = 0;
        }
        // ℓ changed, so every seen item's index moves
        for idx in 0..self.n_items {
            let s = self.stats[idx];
            if s.epochs_offered > 0 {
                self.stats[idx].v_ucb = s.v_hat + self.bonus(s.v_hat, s.epochs_offered);
            }
        }
        self.current = None;
    }
}

impl Policy for EpochUcb {
    fn name(&self) -> &'static str {
        "epoch-ucb"
    }

    fn act(&mut self, view: &PublicView<'_>) -> Result<Assortment> {
        if let Some(s) = &self.current {
            return Ok(s.clone());
        }
        let s = ucb_assortment(&self.ucb_weights(), view.revenues, view.capacity)?;
        self.current = Some(s.clone());
        Ok(s)
    }

    fn observe(&mut self, obs: &Observation) -> Result<()> {
        check_protocol(&self.current, obs)?;
        match obs.outcome {
            Outcome::Item(i) => self.tally[i - 1] += 1,
            Outcome::NoPurchase => self.close_epoch(&obs.offered),
        }
        Ok(())
    }
}

/// Revenue-maximising assortment under optimistic weights.
///
/// Items with an infinite weight (never offered) are offered first, up to
/// `K` of them by smallest id. With equal revenues the value is increasing in
/// the total weight, so the top-`K` weights are optimal at any `N`; otherwise
/// the exhaustive search of [`crate::mnl::best_assortment`] is used.
pub fn ucb_assortment(v_ucb: &[f64], revenues: &[f64], capacity: usize) -> Result<Assortment> {
    if v_ucb.len() != revenues.len() {
        return Err(Error::Domain(format!(
            "{} weights for {} items",
            v_ucb.len(),
            revenues.len()
        )));
    }
    let unseen: Vec<usize> = (1..=v_ucb.len())
        .filter(|&i| v_ucb[i - 1].is_infinite())
        .take(capacity)
        .collect();
    if !unseen.is_empty() {
        return Ok(Assortment::from_sorted(unseen));
    }
    if revenues.windows(2).all(|w| w[0] == w[1]) {
        let mut order: Vec<usize> = (1..=v_ucb.len()).collect();
        order.sort_by(|&a, &b| v_ucb[b - 1].total_cmp(&v_ucb[a - 1]).then(a.cmp(&b)));
        order.truncate(capacity);
        order.sort_unstable();
        return Ok(Assortment::from_sorted(order));
    }
    best_by_enumeration(revenues, v_ucb, capacity).map(|(s, _)| s)
}

/// Serializable policy choice, as named on the command line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum PolicySpec {
    Fixed { items: Assortment },
    Random {
        #[serde(default)]
        seed: u64,
    },
    EpochUcb {
        #[serde(flatten)]
        constants: UcbConstants,
    },
}

impl PolicySpec {
    /// `stream_seed` individualises randomised policies per replication.
    pub fn build(&self, view: &PublicView<'_>, stream_seed: u64) -> Result<Box<dyn Policy>> {
        Ok(match self {
            PolicySpec::Fixed { items } => {
                if items.items().iter().any(|&i| i > view.n_items) || items.len() > view.capacity {
                    return Err(Error::Config(format!(
                        "fixed assortment {items} is not valid for N={} K={}",
                        view.n_items, view.capacity
                    )));
                }
                Box::new(FixedPolicy::new(items.clone()))
            }
            PolicySpec::Random { seed } => Box::new(RandomPolicy::new(crate::runner::seeds::mix(stream_seed, *seed))),
            PolicySpec::EpochUcb { constants } => Box::new(EpochUcb::new(view.n_items, *constants)),
        })
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicySpec::Fixed { items } => {
                let ids: Vec<String> = items.items().iter().map(ToString::to_string).collect();
                write!(f, "fixed={}", ids.join(","))
            }
            PolicySpec::Random { seed } => write!(f, "random={seed}"),
            PolicySpec::EpochUcb { constants } => {
                write!(f, "epoch-ucb={},{}", constants.sqrt_coef, constants.lin_coef)
            }
        }
    }
}

/// Parses `fixed=1,2,3`, `random`, `random=7`, `epoch-ucb` or `epoch-ucb=48,48`.
impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once('=') {
            Some((n, p)) => (n.trim(), Some(p.trim())),
            None => (s.trim(), None),
        };
        let bad = |what: &str| Error::Config(format!("bad policy parameters '{s}': {what}"));
        match (name, params) {
            ("fixed", Some(p)) => {
                let items = p
                    .split(',')
                    .map(|x| x.trim().parse::<usize>().map_err(|e| bad(&e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                Ok(PolicySpec::Fixed {
                    items: Assortment::new(items)?,
                })
            }
            ("fixed", None) => Err(bad("fixed needs an item list")),
            ("random", None) => Ok(PolicySpec::Random { seed: 0 }),
            ("random", Some(p)) => Ok(PolicySpec::Random {
                seed: p.parse().map_err(|e: std::num::ParseIntError| bad(&e.to_string()))?,
            }),
            ("epoch-ucb" | "ucb", None) => Ok(PolicySpec::EpochUcb {
                constants: UcbConstants::default(),
            }),
            ("epoch-ucb" | "ucb", Some(p)) => {
                let coefs = p
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| bad(&e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                match coefs[..] {
                    [sqrt_coef, lin_coef] if sqrt_coef >= 0.0 && lin_coef >= 0.0 => Ok(PolicySpec::EpochUcb {
                        constants: UcbConstants { sqrt_coef, lin_coef },
                    }),
                    _ => Err(bad("expected two nonnegative constants")),
                }
            }
            _ => Err(Error::Config(format!(
                "unknown policy '{name}' (expected fixed, random or epoch-ucb)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::mnl::best_assortment;

    const REVENUES: [f64; 5] = [1.0; 5];

    fn view(n: usize, k: usize, revenues: &[f64]) -> PublicView<'_> {
        PublicView {
            n_items: n,
            capacity: k,
            revenues,
        }
    }

    fn obs(offered: &Assortment, outcome: Outcome, step: usize) -> Observation {
        Observation {
            offered: offered.clone(),
            outcome,
            step,
        }
    }

    #[test]
    fn fixed_policy_repeats_target() {
        let mut p = FixedPolicy::new(Assortment::first(2));
        let v = view(5, 2, &REVENUES);
        for t in 0..5 {
            let s = p.act(&v).unwrap();
            assert_eq!(s, Assortment::first(2));
            p.observe(&obs(&s, Outcome::Item(1), t)).unwrap();
        }
    }

    #[test]
    fn random_policy_is_uniform_over_subsets() {
        let mut p = RandomPolicy::new(11);
        let v = view(5, 2, &REVENUES);
        let calls = 100_000;
        let mut freq: HashMap<Assortment, usize> = HashMap::new();
        for _ in 0..calls {
            *freq.entry(p.act(&v).unwrap()).or_default() += 1;
        }
        assert_eq!(freq.len(), 10);
        let sigma = (0.1f64 * 0.9 / calls as f64).sqrt();
        assert!(freq.values().all(|&c| (c as f64 / calls as f64 - 0.1).abs() <= 4.0 * sigma));
    }

    #[test]
    fn protocol_violations_are_errors() {
        let mut p = FixedPolicy::new(Assortment::first(2));
        let v = view(5, 2, &REVENUES);
        assert!(matches!(
            p.observe(&obs(&Assortment::first(2), Outcome::NoPurchase, 0)),
            Err(Error::Protocol(_))
        ));
        p.act(&v).unwrap();
        let other = Assortment::new(vec![3, 4]).unwrap();
        assert!(matches!(
            p.observe(&obs(&other, Outcome::NoPurchase, 0)),
            Err(Error::Protocol(_))
        ));
        assert!(matches!(
            p.observe(&obs(&Assortment::first(2), Outcome::Item(5), 0)),
            Err(Error::Protocol(_))
        ));

        let mut ucb = EpochUcb::new(5, UcbConstants::default());
        let s = ucb.act(&v).unwrap();
        assert!(ucb.observe(&obs(&other, Outcome::NoPurchase, 0)).is_err());
        assert!(ucb.observe(&obs(&s, Outcome::NoPurchase, 0)).is_ok());
    }

    #[test]
    fn ucb_starts_with_lexicographic_exploration() {
        let mut ucb = EpochUcb::new(5, UcbConstants::default());
        assert_eq!(ucb.act(&view(5, 2, &REVENUES)).unwrap(), Assortment::first(2));
    }

    #[test]
    fn ucb_holds_assortment_within_epoch() {
        let v = view(5, 2, &REVENUES);
        let mut ucb = EpochUcb::new(5, UcbConstants::default());
        let s = ucb.act(&v).unwrap();
        ucb.observe(&obs(&s, Outcome::Item(1), 0)).unwrap();
        assert_eq!(ucb.act(&v).unwrap(), s);
        ucb.observe(&obs(&s, Outcome::Item(1), 1)).unwrap();
        assert_eq!(ucb.act(&v).unwrap(), s);
        assert_eq!(ucb.epoch_index(), 0);
        ucb.observe(&obs(&s, Outcome::NoPurchase, 2)).unwrap();
        assert_eq!(ucb.epoch_index(), 1);
        assert_eq!(ucb.v_hat(1), 2.0);
        assert_eq!(ucb.v_hat(2), 0.0);
        assert_eq!(ucb.epochs_offered(1), 1);
        assert!(ucb.v_ucb(1) > ucb.v_hat(1));
        // next epoch explores the unseen items
        assert_eq!(ucb.act(&v).unwrap().items(), &[3, 4]);
    }

    #[test]
    fn empty_epoch_pulls_estimate_down() {
        let v = view(2, 2, &REVENUES[..2]);
        let mut ucb = EpochUcb::new(2, UcbConstants::default());
        let s = ucb.act(&v).unwrap();
        ucb.observe(&obs(&s, Outcome::NoPurchase, 0)).unwrap();
        assert_eq!((ucb.v_hat(1), ucb.v_hat(2)), (0.0, 0.0));
        let s = ucb.act(&v).unwrap();
        ucb.observe(&obs(&s, Outcome::Item(1), 1)).unwrap();
        ucb.observe(&obs(&s, Outcome::NoPurchase, 2)).unwrap();
        assert_eq!((ucb.v_hat(1), ucb.v_hat(2)), (0.5, 0.0));
        assert_eq!(ucb.epochs_offered(1), 2);
        assert!(ucb.v_ucb(2) >= ucb.v_hat(2));
    }

    #[test]
    fn bonus_shrinks_with_exposure() {
        let mut ucb = EpochUcb::new(16, UcbConstants::default());
        ucb.epochs = 50;
        let mut prev = f64::INFINITY;
        for t in 1..200 {
            let b = ucb.bonus(0.3, t);
            assert!(b <= prev);
            prev = b;
        }
    }

    #[test]
    fn equal_revenue_selection_is_top_k() {
        let w = [0.3, 0.9, 0.1, 0.9, 0.5];
        assert_eq!(ucb_assortment(&w, &REVENUES, 3).unwrap().items(), &[2, 4, 5]);
        // ties resolve to smaller ids
        let w = [0.5; 5];
        assert_eq!(ucb_assortment(&w, &REVENUES, 2).unwrap(), Assortment::first(2));
        let w = [f64::INFINITY; 5];
        assert_eq!(ucb_assortment(&w, &REVENUES, 3).unwrap(), Assortment::first(3));
    }

    #[test]
    fn planted_weights_recover_planted_set() {
        let k = 3.0;
        let w: Vec<f64> = (1..=12)
            .map(|i| if [2, 7, 11].contains(&i) { 1.2 / k } else { 1.0 / k })
            .collect();
        let r = vec![1.0; 12];
        assert_eq!(ucb_assortment(&w, &r, 3).unwrap().items(), &[2, 7, 11]);
    }

    #[test]
    fn unequal_revenues_use_enumeration() {
        let r = [1.0, 0.8, 0.5];
        let w = [0.2, 1.0, 2.0];
        let inst = MnlInstance::new(r.to_vec(), w.to_vec(), 2).unwrap();
        assert_eq!(ucb_assortment(&w, &r, 2).unwrap(), best_assortment(&inst).unwrap().0);
        let big_r: Vec<f64> = (0..30).map(|i| 0.5 + i as f64 / 100.0).collect();
        assert!(matches!(
            ucb_assortment(&[1.0; 30], &big_r, 2),
            Err(Error::TooLarge { .. })
        ));
        // shortcut applies at any N when revenues are equal
        assert_eq!(ucb_assortment(&[1.0; 30], &[1.0; 30], 2).unwrap(), Assortment::first(2));
    }

    #[test]
    fn policy_spec_parsing() {
        assert_eq!(
            "fixed=3,1".parse::<PolicySpec>().unwrap(),
            PolicySpec::Fixed {
                items: Assortment::new(vec![1, 3]).unwrap()
            }
        );
        assert_eq!("random".parse::<PolicySpec>().unwrap(), PolicySpec::Random { seed: 0 });
        assert_eq!("random=9".parse::<PolicySpec>().unwrap(), PolicySpec::Random { seed: 9 });
        let ucb: PolicySpec = "epoch-ucb=4,2".parse().unwrap();
        assert_eq!(ucb.to_string(), "epoch-ucb=4,2");
        assert!("epoch-ucb=1".parse::<PolicySpec>().is_err());
        assert!("fixed".parse::<PolicySpec>().is_err());
        assert!("thompson".parse::<PolicySpec>().is_err());
        for spec in ["fixed=1,2", "random=3", "epoch-ucb"] {
            let p: PolicySpec = spec.parse().unwrap();
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(serde_json::from_str::<PolicySpec>(&json).unwrap(), p);
        }
    }
}
