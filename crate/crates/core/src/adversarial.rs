//! Planted lower-bound instances.
//!
//! For an elevated set `S` of size `K`, every revenue is 1 and item `i` has
//! preference `(1+ε)/K` if `i ∈ S`, else `1/K`. `S` is then the unique
//! optimal assortment with value `(1+ε)/(2+ε)`, and any other size-`K`
//! assortment sharing only `(1−δ)K` items with `S` loses
//! `δε / ((2+ε)(2+(1−δ)ε)) ≥ δε/9` per round.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::mnl::{Assortment, MnlInstance};
use crate::{Error, Result};

/// Upper end of the admissible `ε` range.
pub const EPSILON_MAX: f64 = 0.5;

/// Constant on the `√(NT)` branch of the bound.
pub const SQRT_BRANCH_CONSTANT: f64 = 0.001;

/// Divisor on the linear branch of the bound.
pub const LINEAR_BRANCH_DIVISOR: f64 = 54.0;

/// Parameters of one planted instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct AdversarialSpec {
    n_items: usize,
    capacity: usize,
    epsilon: f64,
    elevated_set: Assortment,
}

#[derive(Serialize, Deserialize)]
struct RawSpec {
    n_items: usize,
    capacity: usize,
    epsilon: f64,
    elevated_set: Assortment,
    /// Derived on output; ignored on input.
    #[serde(default, skip_deserializing)]
    theorem_applicable: bool,
}

impl TryFrom<RawSpec> for AdversarialSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        Self::new(raw.n_items, raw.capacity, raw.epsilon, raw.elevated_set)
    }
}

impl From<AdversarialSpec> for RawSpec {
    fn from(spec: AdversarialSpec) -> Self {
        let theorem_applicable = spec.theorem_applicable();
        Self {
            n_items: spec.n_items,
            capacity: spec.capacity,
            epsilon: spec.epsilon,
            elevated_set: spec.elevated_set,
            theorem_applicable,
        }
    }
}

impl AdversarialSpec {
    pub fn new(n_items: usize, capacity: usize, epsilon: f64, elevated_set: Assortment) -> Result<Self> {
        if capacity == 0 || capacity > n_items {
            return Err(Error::InvalidInstance(format!(
                "capacity {capacity} outside 1..={n_items}"
            )));
        }
        check_epsilon(epsilon)?;
        if elevated_set.len() != capacity {
            return Err(Error::InvalidInstance(format!(
                "elevated set has {} items, expected exactly {capacity}",
                elevated_set.len()
            )));
        }
        if let Some(&bad) = elevated_set.items().iter().find(|&&i| i > n_items) {
            return Err(Error::InvalidAssortment(format!(
                "elevated item {bad} out of range 1..={n_items}"
            )));
        }
        Ok(Self {
            n_items,
            capacity,
            epsilon,
            elevated_set,
        })
    }

    pub fn n_items(&self) -> usize {
        self.n_items
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn elevated_set(&self) -> &Assortment {
        &self.elevated_set
    }

    /// Whether `K ≤ N/4`, the regime where the lower bound is proven.
    pub fn theorem_applicable(&self) -> bool {
        theorem_applicable(self.n_items, self.capacity)
    }
}

pub fn theorem_applicable(n_items: usize, capacity: usize) -> bool {
    4 * capacity <= n_items
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= EPSILON_MAX {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon {epsilon} outside (0, 0.5]")))
    }
}

/// Preference vector of the planted parameterisation for an arbitrary set
/// (the neighbouring sets used in the divergence bounds have size `K−1`).
pub(crate) fn planted_preferences(n_items: usize, capacity: usize, epsilon: f64, set: &Assortment) -> Vec<f64> {
    let k = capacity as f64;
    let mut prefs = vec![1.0 / k; n_items];
    for &i in set.items() {
        prefs[i - 1] = (1.0 + epsilon) / k;
    }
    prefs
}

pub fn build_instance(spec: &AdversarialSpec) -> MnlInstance {
    let prefs = planted_preferences(spec.n_items, spec.capacity, spec.epsilon, &spec.elevated_set);
    MnlInstance::new(vec![1.0; spec.n_items], prefs, spec.capacity)
        .expect("validated spec yields a valid instance")
}

/// Closed-form optimal revenue of a planted instance, `(1+ε)/(2+ε)`.
pub fn planted_optimum_value(epsilon: f64) -> f64 {
    (1.0 + epsilon) / (2.0 + epsilon)
}

/// `ε = min{0.05·√(N/T), 0.5}`.
pub fn epsilon_schedule(n_items: usize, horizon: usize) -> f64 {
    (0.05 * (n_items as f64 / horizon as f64).sqrt()).min(EPSILON_MAX)
}

/// `δ = 1 − |s0 ∩ s̃| / K`.
pub fn overlap_delta(s0: &Assortment, s_tilde: &Assortment, capacity: usize) -> Result<f64> {
    if s0.len() != capacity || s_tilde.len() != capacity {
        return Err(Error::InvalidAssortment(format!(
            "both sets must have exactly {capacity} items (got {} and {})",
            s0.len(),
            s_tilde.len()
        )));
    }
    Ok(1.0 - s0.overlap(s_tilde) as f64 / capacity as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapValue {
    pub delta: f64,
    pub exact_gap: f64,
    /// `δε/9`.
    pub lower_bound_gap: f64,
}

pub fn single_stage_gap(epsilon: f64, delta: f64) -> Result<GapValue> {
    check_epsilon(epsilon)?;
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta {delta} outside [0, 1]")));
    }
    let exact_gap = delta * epsilon / ((2.0 + epsilon) * (2.0 + (1.0 - delta) * epsilon));
    Ok(GapValue {
        delta,
        exact_gap,
        lower_bound_gap: delta * epsilon / 9.0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Regime {
    SqrtNt,
    LinearT,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SqrtNt => "SQRT_NT",
            Regime::LinearT => "LINEAR_T",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundValue {
    pub value: f64,
    pub constant_c: f64,
    pub regime: Regime,
}

/// `min{0.001·√(NT), T/54}`; only defined for `K ≤ N/4`.
pub fn theorem_lower_bound(n_items: usize, horizon: usize, capacity: usize) -> Result<LowerBoundValue> {
    if n_items == 0 || horizon == 0 || capacity == 0 {
        return Err(Error::Domain("N, T and K must be positive".into()));
    }
    if !theorem_applicable(n_items, capacity) {
        return Err(Error::NotApplicable { n_items, capacity });
    }
    let sqrt_branch = SQRT_BRANCH_CONSTANT * (n_items as f64 * horizon as f64).sqrt();
    let linear_branch = horizon as f64 / LINEAR_BRANCH_DIVISOR;
    let (value, regime) = if sqrt_branch <= linear_branch {
        (sqrt_branch, Regime::SqrtNt)
    } else {
        (linear_branch, Regime::LinearT)
    };
    Ok(LowerBoundValue {
        value,
        constant_c: SQRT_BRANCH_CONSTANT,
        regime,
    })
}

/// Uniform draw from the `C(N, K)` subsets of size `K`.
pub fn sample_elevated_set<R: Rng + ?Sized>(n_items: usize, capacity: usize, rng: &mut R) -> Assortment {
    assert!(capacity <= n_items, "capacity {capacity} exceeds {n_items} items");
    let mut items: Vec<usize> = rand::seq::index::sample(rng, n_items, capacity)
        .into_iter()
        .map(|i| i + 1)
        .collect();
    items.sort_unstable();
    Assortment::from_sorted(items)
}

/// All size-`k` subsets of `1..=n` in lexicographic order.
pub fn all_elevated_sets(n_items: usize, capacity: usize) -> Combinations {
    Combinations {
        n: n_items,
        current: (capacity <= n_items).then(|| (1..=capacity).collect()),
    }
}

pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Iterator for Combinations {
    type Item = Assortment;

    fn next(&mut self) -> Option<Assortment> {
        let out = self.current.clone()?;
        let k = out.len();
        let mut advanced = self.current.take().unwrap();
        // rightmost position that can still move up
        if let Some(pos) = (0..k).rev().find(|&p| advanced[p] < self.n - (k - 1 - p)) {
            advanced[pos] += 1;
            for q in pos + 1..k {
                advanced[q] = advanced[q - 1] + 1;
            }
            self.current = Some(advanced);
        }
        Some(Assortment::from_sorted(out))
    }
}
