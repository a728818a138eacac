//! Exact capacitated multinomial-logit choice environment.
//!
//! Items are identified by ids `1..=N`. The outside option (no purchase)
//! has weight `v₀ = 1` and is represented by [`Outcome::NoPurchase`], never
//! by an item id.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest item count for which [`best_assortment`] will enumerate.
pub const ENUMERATION_LIMIT: usize = 25;

/// Purchase outcome of a single customer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    NoPurchase,
    Item(usize),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::NoPurchase => f.write_str("none"),
            Outcome::Item(i) => write!(f, "{i}"),
        }
    }
}

/// A set of offered items, stored as a strictly increasing list of 1-based ids.
///
/// Range and capacity are checked against an instance with
/// [`MnlInstance::validate`]; construction only rejects id 0 and duplicates.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Assortment(Vec<usize>);

impl Assortment {
    pub fn new(mut items: Vec<usize>) -> Result<Self> {
        if items.contains(&0) {
            return Err(Error::InvalidAssortment(
                "item ids are 1-based; 0 is reserved for no-purchase".into(),
            ));
        }
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidAssortment(format!("duplicate item {}", w[0])));
        }
        Ok(Self(items))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `{1, …, k}`.
    pub fn first(k: usize) -> Self {
        Self((1..=k).collect())
    }

    /// Caller guarantees `items` is strictly increasing and free of 0.
    pub(crate) fn from_sorted(items: Vec<usize>) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(!items.contains(&0));
        Self(items)
    }

    pub fn items(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Number of items shared with `other`.
    pub fn overlap(&self, other: &Assortment) -> usize {
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        let mut shared = 0;
        while let (Some(&&x), Some(&&y)) = (a.peek(), b.peek()) {
            match x.cmp(&y) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    shared += 1;
                    a.next();
                    b.next();
                }
            }
        }
        shared
    }
}

impl TryFrom<Vec<usize>> for Assortment {
    type Error = Error;

    fn try_from(items: Vec<usize>) -> Result<Self> {
        Self::new(items)
    }
}

impl From<Assortment> for Vec<usize> {
    fn from(s: Assortment) -> Self {
        s.0
    }
}

impl fmt::Display for Assortment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (idx, item) in self.0.iter().enumerate() {
            if idx > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{item}")?;
        }
        f.write_str("}")
    }
}

/// Revenues, preferences and capacity of an MNL environment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MnlInstance {
    capacity: usize,
    revenues: Vec<f64>,
    preferences: Vec<f64>,
}

impl MnlInstance {
    pub fn new(revenues: Vec<f64>, preferences: Vec<f64>, capacity: usize) -> Result<Self> {
        let n = revenues.len();
        if n == 0 {
            return Err(Error::InvalidInstance("at least one item is required".into()));
        }
        if preferences.len() != n {
            return Err(Error::InvalidInstance(format!(
                "{n} revenues but {} preferences",
                preferences.len()
            )));
        }
        if capacity == 0 || capacity > n {
            return Err(Error::InvalidInstance(format!(
                "capacity {capacity} outside 1..={n}"
            )));
        }
        if let Some((i, r)) = revenues
            .iter()
            .enumerate()
            .find(|(_, &r)| !(r > 0.0 && r <= 1.0))
        {
            return Err(Error::InvalidInstance(format!(
                "revenue of item {} is {r}, must lie in (0, 1]",
                i + 1
            )));
        }
        if let Some((i, v)) = preferences
            .iter()
            .enumerate()
            .find(|(_, &v)| !(v > 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidInstance(format!(
                "preference of item {} is {v}, must be positive",
                i + 1
            )));
        }
        Ok(Self {
            capacity,
            revenues,
            preferences,
        })
    }

    pub fn n_items(&self) -> usize {
        self.revenues.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn revenues(&self) -> &[f64] {
        &self.revenues
    }

    pub fn preferences(&self) -> &[f64] {
        &self.preferences
    }

    pub fn revenue(&self, item: usize) -> f64 {
        self.revenues[item - 1]
    }

    pub fn preference(&self, item: usize) -> f64 {
        self.preferences[item - 1]
    }

    /// Checks that `s` only names items of this instance and respects capacity.
    pub fn validate(&self, s: &Assortment) -> Result<()> {
        if let Some(&bad) = s.items().iter().find(|&&i| i > self.n_items()) {
            return Err(Error::InvalidAssortment(format!(
                "item {bad} out of range 1..={}",
                self.n_items()
            )));
        }
        if s.len() > self.capacity {
            return Err(Error::CapacityViolation {
                size: s.len(),
                capacity: self.capacity,
            });
        }
        Ok(())
    }
}

/// Law of the purchase outcome given an offered assortment.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiceDistribution {
    outcomes: Vec<(Outcome, f64)>,
}

impl ChoiceDistribution {
    /// Outcomes in order: no-purchase first, then offered items by id.
    pub fn outcomes(&self) -> &[(Outcome, f64)] {
        &self.outcomes
    }

    pub fn probability(&self, outcome: Outcome) -> f64 {
        self.outcomes
            .iter()
            .find(|(o, _)| *o == outcome)
            .map_or(0.0, |&(_, p)| p)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|&(_, p)| p).collect()
    }
}

/// `P(j) = v_j / (1 + Σ_{j'∈s} v_j')`, with `P(no purchase) = 1 / (1 + Σ v)`.
pub fn choice_distribution(instance: &MnlInstance, s: &Assortment) -> Result<ChoiceDistribution> {
    instance.validate(s)?;
    let denom = s
        .items()
        .iter()
        .fold(1.0, |acc, &i| acc + instance.preference(i));
    let mut outcomes = Vec::with_capacity(s.len() + 1);
    outcomes.push((Outcome::NoPurchase, 1.0 / denom));
    outcomes.extend(
        s.items()
            .iter()
            .map(|&i| (Outcome::Item(i), instance.preference(i) / denom)),
    );
    Ok(ChoiceDistribution { outcomes })
}

/// `R_v(s) = Σ r_i v_i / (1 + Σ v_i)`.
pub fn expected_revenue(instance: &MnlInstance, s: &Assortment) -> Result<f64> {
    instance.validate(s)?;
    Ok(revenue_of(instance.revenues(), instance.preferences(), s.items()))
}

/// Shared arithmetic for expected revenue so every caller rounds identically.
pub(crate) fn revenue_of(revenues: &[f64], weights: &[f64], items: &[usize]) -> f64 {
    let (num, den) = items.iter().fold((0.0, 1.0), |(num, den), &i| {
        (num + revenues[i - 1] * weights[i - 1], den + weights[i - 1])
    });
    num / den
}

/// Draws one outcome by inverse-CDF on a single uniform.
pub fn sample_choice<R: Rng + ?Sized>(dist: &ChoiceDistribution, rng: &mut R) -> Outcome {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(outcome, p) in &dist.outcomes {
        acc += p;
        if u < acc {
            return outcome;
        }
    }
    // u landed in the rounding slack above the last cumulative sum
    dist.outcomes.last().map_or(Outcome::NoPurchase, |&(o, _)| o)
}

/// Exhaustive maximiser of expected revenue over all subsets of size ≤ K.
///
/// Candidates are visited in lexicographic order of their item lists and a
/// later candidate only replaces the incumbent when strictly better, so ties
/// resolve to the lexicographically smallest list.
pub fn best_assortment(instance: &MnlInstance) -> Result<(Assortment, f64)> {
    best_by_enumeration(instance.revenues(), instance.preferences(), instance.capacity())
}

pub(crate) fn best_by_enumeration(
    revenues: &[f64],
    weights: &[f64],
    capacity: usize,
) -> Result<(Assortment, f64)> {
    let n = revenues.len();
    if n > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            n_items: n,
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut search = Search {
        revenues,
        weights,
        capacity,
        stack: Vec::with_capacity(capacity),
        best: Vec::new(),
        best_value: 0.0,
    };
    search.descend(1, 0.0, 1.0);
    Ok((Assortment::from_sorted(search.best), search.best_value))
}

struct Search<'a> {
    revenues: &'a [f64],
    weights: &'a [f64],
    capacity: usize,
    stack: Vec<usize>,
    best: Vec<usize>,
    best_value: f64,
}

impl Search<'_> {
    fn descend(&mut self, next: usize, num: f64, den: f64) {
        if self.stack.len() == self.capacity {
            return;
        }
        for item in next..=self.revenues.len() {
            let num = num + self.revenues[item - 1] * self.weights[item - 1];
            let den = den + self.weights[item - 1];
            self.stack.push(item);
            let value = num / den;
            if value > self.best_value {
                self.best_value = value;
                self.best.clone_from(&self.stack);
            }
            self.descend(item + 1, num, den);
            self.stack.pop();
        }
    }
}

/// `R_v(S*) − R_v(s)`.
pub fn instantaneous_regret(instance: &MnlInstance, s: &Assortment) -> Result<f64> {
    let value = expected_revenue(instance, s)?;
    let (_, best) = best_assortment(instance)?;
    Ok(best - value)
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn planted(n: usize, k: usize, eps: f64, elevated: &[usize]) -> MnlInstance {
        let prefs = (1..=n)
            .map(|i| {
                if elevated.contains(&i) {
                    (1.0 + eps) / k as f64
                } else {
                    1.0 / k as f64
                }
            })
            .collect();
        MnlInstance::new(vec![1.0; n], prefs, k).unwrap()
    }

    fn small() -> MnlInstance {
        MnlInstance::new(vec![1.0, 0.8, 0.5], vec![0.2, 1.0, 2.0], 2).unwrap()
    }

    #[test]
    fn planted_set_probabilities() {
        let inst = planted(10, 5, 0.5, &[1, 2, 3, 4, 5]);
        let d = choice_distribution(&inst, &Assortment::first(5)).unwrap();
        assert_abs_diff_eq!(d.probability(Outcome::NoPurchase), 0.4, epsilon = 1e-12);
        for i in 1..=5 {
            assert_abs_diff_eq!(d.probability(Outcome::Item(i)), 0.12, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(
            expected_revenue(&inst, &Assortment::first(5)).unwrap(),
            0.6,
            epsilon = 1e-12
        );
    }

    #[test]
    fn empty_assortment_is_point_mass() {
        let inst = small();
        let d = choice_distribution(&inst, &Assortment::empty()).unwrap();
        assert_eq!(d.outcomes(), &[(Outcome::NoPurchase, 1.0)]);
        assert_eq!(expected_revenue(&inst, &Assortment::empty()).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| sample_choice(&d, &mut rng) == Outcome::NoPurchase));
    }

    #[test]
    fn two_item_hand_example() {
        let inst = MnlInstance::new(vec![1.0, 0.5], vec![1.0, 1.0], 2).unwrap();
        let s = Assortment::first(2);
        let d = choice_distribution(&inst, &s).unwrap();
        for p in d.probabilities() {
            assert_abs_diff_eq!(p, 1.0 / 3.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(expected_revenue(&inst, &s).unwrap(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn invalid_assortments_are_rejected() {
        let inst = small();
        assert!(matches!(
            Assortment::new(vec![1, 1]),
            Err(Error::InvalidAssortment(_))
        ));
        assert!(matches!(
            Assortment::new(vec![0, 2]),
            Err(Error::InvalidAssortment(_))
        ));
        let out_of_range = Assortment::new(vec![4]).unwrap();
        assert!(matches!(
            choice_distribution(&inst, &out_of_range),
            Err(Error::InvalidAssortment(_))
        ));
        assert!(matches!(
            expected_revenue(&inst, &Assortment::first(3)),
            Err(Error::CapacityViolation {
                size: 3,
                capacity: 2
            })
        ));
    }

    #[test]
    fn invalid_instances_are_rejected() {
        assert!(MnlInstance::new(vec![], vec![], 1).is_err());
        assert!(MnlInstance::new(vec![1.0], vec![1.0], 2).is_err());
        assert!(MnlInstance::new(vec![1.0], vec![1.0], 0).is_err());
        assert!(MnlInstance::new(vec![1.5], vec![1.0], 1).is_err());
        assert!(MnlInstance::new(vec![0.0], vec![1.0], 1).is_err());
        assert!(MnlInstance::new(vec![1.0], vec![0.0], 1).is_err());
        assert!(MnlInstance::new(vec![1.0, 1.0], vec![1.0], 1).is_err());
        // K = N is allowed here
        assert!(MnlInstance::new(vec![1.0, 1.0], vec![1.0, 1.0], 2).is_ok());
    }

    #[test]
    fn three_item_enumeration_example() {
        // {1}: .2/1.2, {2}: .8/2, {3}: 1/3, {1,2}: 1/2.2, {1,3}: 1.2/3.2, {2,3}: 1.8/4
        let (s, v) = best_assortment(&small()).unwrap();
        assert_eq!(s.items(), &[1, 2]);
        assert_abs_diff_eq!(v, 1.0 / 2.2, epsilon = 1e-12);
        let gap = instantaneous_regret(&small(), &Assortment::new(vec![3]).unwrap()).unwrap();
        assert_abs_diff_eq!(gap, 1.0 / 2.2 - 1.0 / 3.0, epsilon = 1e-12);
        assert_eq!(instantaneous_regret(&small(), &s).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_instance_picks_first_k() {
        let inst = MnlInstance::new(vec![0.7; 8], vec![0.3; 8], 3).unwrap();
        let (s, v) = best_assortment(&inst).unwrap();
        assert_eq!(s, Assortment::first(3));
        let other = Assortment::new(vec![2, 5, 8]).unwrap();
        assert_eq!(expected_revenue(&inst, &other).unwrap(), v);
    }

    #[test]
    fn planted_optimum_and_disjoint_gap() {
        let inst = planted(10, 5, 0.5, &[1, 2, 3, 4, 5]);
        let (s, v) = best_assortment(&inst).unwrap();
        assert_eq!(s, Assortment::first(5));
        assert_abs_diff_eq!(v, 1.5 / 2.5, epsilon = 1e-12);
        let disjoint = Assortment::new(vec![6, 7, 8, 9, 10]).unwrap();
        assert_abs_diff_eq!(
            instantaneous_regret(&inst, &disjoint).unwrap(),
            0.1,
            epsilon = 1e-12
        );
    }

    #[test]
    fn enumeration_guard() {
        let inst = MnlInstance::new(vec![1.0; 26], vec![1.0; 26], 2).unwrap();
        assert!(matches!(
            best_assortment(&inst),
            Err(Error::TooLarge { n_items: 26, .. })
        ));
    }

    #[test]
    fn sampling_matches_planted_probability() {
        let inst = planted(10, 5, 0.5, &[1, 2, 3, 4, 5]);
        let d = choice_distribution(&inst, &Assortment::first(5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let draws = 100_000;
        let none = (0..draws)
            .filter(|_| sample_choice(&d, &mut rng) == Outcome::NoPurchase)
            .count();
        let freq = none as f64 / draws as f64;
        assert!((freq - 0.4).abs() <= 4.0 * (0.4f64 * 0.6 / draws as f64).sqrt());
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let d = choice_distribution(&small(), &Assortment::first(2)).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| sample_choice(&d, &mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn overlap_counts_shared_items() {
        let a = Assortment::new(vec![1, 3, 5, 7]).unwrap();
        let b = Assortment::new(vec![3, 4, 5, 6]).unwrap();
        assert_eq!(a.overlap(&b), 2);
        assert_eq!(a.overlap(&a), 4);
        assert_eq!(a.overlap(&Assortment::empty()), 0);
    }
}
