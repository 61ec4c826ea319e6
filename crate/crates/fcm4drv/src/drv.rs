//! Discrete random variables represented as finite probability mass
//! functions, with exact convolution arithmetic.
//!
//! A [`Drv`] is a sorted list of distinct real values and their positive
//! probabilities. Sums and products of independent variables enumerate the
//! cross product of supports and accumulate probability over colliding
//! outcomes; scalar functions are lifted pointwise with the same collision
//! handling.

use std::fmt;
use std::str::FromStr;

use crate::error::DrvError;

/// Values closer than this are coalesced into one support point.
///
/// Floating-point products create spurious near-duplicates, so "equal
/// outcome" is detected with an absolute tolerance rather than bit equality.
pub const MERGE_EPSILON: f64 = 1e-9;

/// Entries with less mass than this are dropped after normalization.
pub const PRUNE_EPSILON: f64 = 1e-15;

/// Stored masses must sum to 1 within this tolerance; anything further off
/// gets renormalized. Staying put when already within tolerance keeps
/// untouched probabilities bit-identical across construct/serialize cycles.
const NORM_TOL: f64 = 1e-9;

/// How far an explicitly supplied PMF may be from summing to 1.
pub const INPUT_MASS_TOL: f64 = 1e-6;

/// A discrete random variable: a finite PMF over real values.
///
/// Invariants (enforced at construction):
/// - values are finite, strictly increasing, coalesced at [`MERGE_EPSILON`];
/// - probabilities are positive and sum to 1 within 1e-9;
/// - the support is never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Drv {
    values: Vec<f64>,
    probs: Vec<f64>,
}

impl Drv {
    /// Builds a variable from an explicit PMF. The masses must already sum
    /// to 1 within [`INPUT_MASS_TOL`]; zero-mass entries are dropped.
    pub fn new(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Drv, DrvError> {
        let pairs = validate_pairs(pairs)?;
        if pairs.is_empty() {
            return Err(DrvError::EmptySupport);
        }
        let sum: f64 = pairs.iter().map(|&(_, p)| p).sum();
        if (sum - 1.0).abs() > INPUT_MASS_TOL {
            return Err(DrvError::MassNotNormalized { sum, tol: INPUT_MASS_TOL });
        }
        build(pairs)
    }

    /// Builds a variable from arbitrary non-negative weights, normalizing
    /// them to total mass 1.
    pub fn from_weighted(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Drv, DrvError> {
        build(validate_pairs(pairs)?)
    }

    /// The degenerate variable taking value `c` with probability 1.
    pub fn singleton(c: f64) -> Result<Drv, DrvError> {
        if !c.is_finite() {
            return Err(DrvError::NonFiniteValue(c));
        }
        Ok(Drv { values: vec![canonical(c)], probs: vec![1.0] })
    }

    /// `count` equally spaced values spanning `[min, max]`, each with
    /// probability `1/count`.
    pub fn uniform_grid(min: f64, max: f64, count: usize) -> Result<Drv, DrvError> {
        if !min.is_finite() || !max.is_finite() || min >= max || count < 2 {
            return Err(DrvError::InvalidGrid { min, max, count });
        }
        let step = (max - min) / (count - 1) as f64;
        let mut values: Vec<f64> = (0..count).map(|i| min + i as f64 * step).collect();
        values[count - 1] = max;
        let p = 1.0 / count as f64;
        Ok(Drv { values, probs: vec![p; count] })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Number of support points. Always at least 1: an empty support cannot
    /// be constructed, so there is no `is_empty`.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    /// Smallest support value.
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    /// Largest support value.
    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// True when the variable is a single value with probability 1.
    pub fn is_singleton(&self) -> bool {
        self.values.len() == 1
    }

    /// True for the singleton at exactly `c`.
    pub fn is_singleton_at(&self, c: f64) -> bool {
        self.is_singleton() && self.values[0] == c
    }

    /// Expected value.
    pub fn mean(&self) -> f64 {
        self.iter().map(|(v, p)| v * p).sum()
    }

    /// Cumulative probability of values `<= x`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.iter().take_while(|&(v, _)| v <= x).map(|(_, p)| p).sum()
    }

    /// Distribution of the sum of two independent variables.
    pub fn sum(&self, other: &Drv) -> Drv {
        self.combine(other, |a, b| a + b)
    }

    /// Distribution of the product of two independent variables.
    pub fn product(&self, other: &Drv) -> Drv {
        self.combine(other, |a, b| a * b)
    }

    fn combine(&self, other: &Drv, op: impl Fn(f64, f64) -> f64) -> Drv {
        let mut pairs = Vec::with_capacity(self.len() * other.len());
        for (x, px) in self.iter() {
            for (y, py) in other.iter() {
                pairs.push((op(x, y), px * py));
            }
        }
        // Inputs are valid, so the cross product is non-empty with mass ~1.
        build(pairs).expect("convolution of valid variables is valid")
    }

    /// Pushes the variable through a scalar function, summing probability
    /// over colliding images.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Drv, DrvError> {
        let mut pairs = Vec::with_capacity(self.len());
        for (v, p) in self.iter() {
            let image = f(v);
            if !image.is_finite() {
                return Err(DrvError::NonFiniteImage { input: v, output: image });
            }
            pairs.push((image, p));
        }
        build(pairs)
    }

    /// Left-continuous inverse CDF: the smallest support value whose
    /// cumulative probability reaches `rank`.
    pub fn quantile(&self, rank: f64) -> Result<f64, DrvError> {
        if !(0.0..=1.0).contains(&rank) {
            return Err(DrvError::RankOutOfRange(rank));
        }
        let mut cum = 0.0;
        for (v, p) in self.iter() {
            cum += p;
            if cum >= rank {
                return Ok(v);
            }
        }
        Ok(self.max())
    }

    /// 1-D earth mover's distance: the integral of the absolute difference
    /// between the two CDFs.
    pub fn emd_distance(&self, other: &Drv) -> f64 {
        let mut total = 0.0;
        walk_cdfs(self, other, |span, fx, fy| total += span * (fx - fy).abs());
        total
    }

    /// Kolmogorov-Smirnov distance: the largest absolute gap between the
    /// two CDFs.
    pub fn ks_distance(&self, other: &Drv) -> f64 {
        let mut worst = 0.0_f64;
        walk_cdfs(self, other, |_, fx, fy| worst = worst.max((fx - fy).abs()));
        worst
    }
}

impl fmt::Display for Drv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (v, p)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}: {p}")?;
        }
        write!(f, "}}")
    }
}

/// Distance measure used to compare two distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DistanceMetric {
    #[default]
    Emd,
    Ks,
}

impl DistanceMetric {
    pub fn distance(&self, x: &Drv, y: &Drv) -> f64 {
        match self {
            DistanceMetric::Emd => x.emd_distance(y),
            DistanceMetric::Ks => x.ks_distance(y),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistanceMetric::Emd => "emd",
            DistanceMetric::Ks => "ks",
        }
    }
}

impl FromStr for DistanceMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "emd" => Ok(DistanceMetric::Emd),
            "ks" => Ok(DistanceMetric::Ks),
            other => Err(format!("unknown metric `{other}`, expected emd or ks")),
        }
    }
}

/// Visits the union of both supports in ascending order, reporting the gap
/// since the previous breakpoint together with the CDF levels on that gap.
/// After the callback at a breakpoint, the levels include its mass.
fn walk_cdfs(x: &Drv, y: &Drv, mut visit: impl FnMut(f64, f64, f64)) {
    let (mut i, mut j) = (0, 0);
    let (mut fx, mut fy) = (0.0, 0.0);
    let mut prev: Option<f64> = None;
    while i < x.len() || j < y.len() {
        let t = match (x.values.get(i), y.values.get(j)) {
            (Some(&a), Some(&b)) => a.min(b),
            (Some(&a), None) => a,
            (None, Some(&b)) => b,
            (None, None) => unreachable!(),
        };
        if let Some(p) = prev {
            visit(t - p, fx, fy);
        }
        if i < x.len() && x.values[i] == t {
            fx += x.probs[i];
            i += 1;
        }
        if j < y.len() && y.values[j] == t {
            fy += y.probs[j];
            j += 1;
        }
        visit(0.0, fx, fy);
        prev = Some(t);
    }
}

/// Maps -0.0 to 0.0 so zero has a single representation in supports.
fn canonical(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn validate_pairs(pairs: impl IntoIterator<Item = (f64, f64)>) -> Result<Vec<(f64, f64)>, DrvError> {
    let mut out = Vec::new();
    for (v, p) in pairs {
        if !v.is_finite() {
            return Err(DrvError::NonFiniteValue(v));
        }
        if !p.is_finite() || p < 0.0 {
            return Err(DrvError::BadProbability { value: v, prob: p });
        }
        if p > 0.0 {
            out.push((canonical(v), p));
        }
    }
    Ok(out)
}

/// Canonical construction: sort, coalesce near-equal values, normalize,
/// prune negligible mass.
///
/// Sorting on (value, prob) makes the result independent of input order,
/// which is what makes convolution commutativity exact rather than
/// approximate.
fn build(mut pairs: Vec<(f64, f64)>) -> Result<Drv, DrvError> {
    if pairs.is_empty() {
        return Err(DrvError::EmptySupport);
    }
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut values = Vec::with_capacity(pairs.len());
    let mut probs = Vec::with_capacity(pairs.len());
    let mut idx = 0;
    while idx < pairs.len() {
        let (first, mut mass) = pairs[idx];
        let mut last = first;
        let mut weighted = first * mass;
        let mut end = idx + 1;
        while end < pairs.len() && pairs[end].0 - last < MERGE_EPSILON {
            let (v, p) = pairs[end];
            last = v;
            mass += p;
            weighted += v * p;
            end += 1;
        }
        // Exactly-equal groups keep their value bit-for-bit; only genuine
        // near-duplicates move to the probability-weighted mean.
        let value = if first == last { first } else { weighted / mass };
        values.push(value);
        probs.push(mass);
        idx = end;
    }

    normalize(&mut probs);
    if probs.iter().any(|&p| p < PRUNE_EPSILON) {
        let mut keep_values = Vec::with_capacity(values.len());
        let mut keep_probs = Vec::with_capacity(probs.len());
        for (v, p) in values.into_iter().zip(probs) {
            if p >= PRUNE_EPSILON {
                keep_values.push(v);
                keep_probs.push(p);
            }
        }
        if keep_probs.is_empty() {
            return Err(DrvError::EmptySupport);
        }
        normalize(&mut keep_probs);
        values = keep_values;
        probs = keep_probs;
    }
    Ok(Drv { values, probs })
}

fn normalize(probs: &mut [f64]) {
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORM_TOL {
        for p in probs.iter_mut() {
            *p /= sum;
        }
    }
}
