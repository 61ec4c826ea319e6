//! Aggregation functions that compact a [`Drv`] to a bounded number of
//! support points while approximately preserving its distribution.
//!
//! Four strategies: 1-D k-means with deterministic evenly spaced seeding,
//! density clustering (DBSCAN) with mass-conserving noise retention,
//! uniform bins with triangular mass splitting, and equal-mass percentile
//! resampling. All are pure functions; none draws randomness.

use std::str::FromStr;

use crate::drv::Drv;
use crate::error::DrvError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AggregatorKind {
    SimpleKmeans,
    Dbscan,
    UniBins,
    PercentileRank,
}

impl AggregatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            AggregatorKind::SimpleKmeans => "simple_kmeans",
            AggregatorKind::Dbscan => "dbscan",
            AggregatorKind::UniBins => "unibins",
            AggregatorKind::PercentileRank => "percentile_rank",
        }
    }
}

impl FromStr for AggregatorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "simple_kmeans" => Ok(AggregatorKind::SimpleKmeans),
            "dbscan" => Ok(AggregatorKind::Dbscan),
            "unibins" => Ok(AggregatorKind::UniBins),
            "percentile_rank" => Ok(AggregatorKind::PercentileRank),
            other => Err(format!(
                "unknown aggregator `{other}`, expected one of simple_kmeans, dbscan, \
                 unibins, percentile_rank"
            )),
        }
    }
}

/// An aggregation strategy with its size bound `k` and, where relevant,
/// the DBSCAN minimal cluster size and the k-means iteration cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregatorSpec {
    pub kind: AggregatorKind,
    pub k: usize,
    pub minpts: usize,
    pub kmeans_max_iters: usize,
}

impl AggregatorSpec {
    /// The given kind with defaults k = 100, minpts = 6, 100 k-means passes.
    pub fn new(kind: AggregatorKind) -> AggregatorSpec {
        AggregatorSpec { kind, k: 100, minpts: 6, kmeans_max_iters: 100 }
    }

    pub fn with_params(
        kind: AggregatorKind,
        k: usize,
        minpts: usize,
        kmeans_max_iters: usize,
    ) -> Result<AggregatorSpec, DrvError> {
        if k < 2 {
            return Err(DrvError::BoundTooSmall(k));
        }
        if minpts == 0 {
            return Err(DrvError::ZeroMinPoints);
        }
        if kmeans_max_iters == 0 {
            return Err(DrvError::NonPositiveParameter { name: "kmeans_max_iters", value: 0.0 });
        }
        Ok(AggregatorSpec { kind, k, minpts, kmeans_max_iters })
    }

    /// Compacts `x` with the configured strategy.
    pub fn aggregate(&self, x: &Drv) -> Drv {
        match self.kind {
            AggregatorKind::SimpleKmeans => aggregate_kmeans(x, self.k, self.kmeans_max_iters),
            AggregatorKind::Dbscan => aggregate_dbscan(x, self.k, self.minpts),
            AggregatorKind::UniBins => aggregate_unibins(x, self.k),
            AggregatorKind::PercentileRank => aggregate_percentile_rank(x, self.k),
        }
    }
}

/// `count` positions evenly spanning `[min, max]`, endpoints included.
fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    let step = (max - min) / (count - 1) as f64;
    let mut out: Vec<f64> = (0..count).map(|i| min + i as f64 * step).collect();
    out[count - 1] = max;
    out
}

/// Lloyd iteration on the support values and the resulting clusters, as
/// member index ranges in support order. Empty clusters are dropped.
fn kmeans_clusters(x: &Drv, k: usize, max_iters: usize) -> Vec<Vec<usize>> {
    let values = x.values();
    let n = values.len();
    let mut centroids = linspace(x.min(), x.max(), k);
    let mut assignment = vec![0usize; n];
    for _ in 0..max_iters {
        // Nearest centroid; on a tie the lower index wins.
        let mut next = vec![0usize; n];
        for (i, &v) in values.iter().enumerate() {
            let mut best = 0;
            let mut best_d = (v - centroids[0]).abs();
            for (j, &c) in centroids.iter().enumerate().skip(1) {
                let d = (v - c).abs();
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            next[i] = best;
        }
        let stable = next == assignment;
        assignment = next;
        // Centroid = unweighted mean of members; an empty cluster keeps
        // its previous position.
        let mut sums = vec![0.0; k];
        let mut counts = vec![0usize; k];
        for (i, &a) in assignment.iter().enumerate() {
            sums[a] += values[i];
            counts[a] += 1;
        }
        for j in 0..k {
            if counts[j] > 0 {
                centroids[j] = sums[j] / counts[j] as f64;
            }
        }
        if stable {
            break;
        }
    }
    let mut clusters = vec![Vec::new(); k];
    for (i, &a) in assignment.iter().enumerate() {
        clusters[a].push(i);
    }
    clusters.retain(|c| !c.is_empty());
    clusters
}

/// 1-D k-means with k centroids initially evenly spaced over the support
/// range. Each surviving cluster becomes one pair: the unweighted mean of
/// its member values carrying the sum of their probabilities.
pub fn aggregate_kmeans(x: &Drv, k: usize, max_iters: usize) -> Drv {
    assert!(k >= 2, "aggregation bound must be at least 2");
    if x.len() <= 1 {
        return x.clone();
    }
    let pairs = kmeans_clusters(x, k, max_iters).into_iter().map(|members| {
        let mean: f64 =
            members.iter().map(|&i| x.values()[i]).sum::<f64>() / members.len() as f64;
        let mass: f64 = members.iter().map(|&i| x.probs()[i]).sum();
        (mean, mass)
    });
    Drv::from_weighted(pairs).expect("clusters cover the whole support")
}

/// Density clustering with neighborhood radius (max - min)/k and minimal
/// cluster size `minpts`. Each cluster collapses to its probability-weighted
/// mean carrying the cluster's total mass; noise points pass through
/// unchanged so no probability is lost, which means the output can exceed
/// k entries when the input is scattered.
pub fn aggregate_dbscan(x: &Drv, k: usize, minpts: usize) -> Drv {
    assert!(k >= 2, "aggregation bound must be at least 2");
    assert!(minpts >= 1, "minimal cluster size must be at least 1");
    let values = x.values();
    let n = values.len();
    if n <= 1 {
        return x.clone();
    }
    let eps = (x.max() - x.min()) / k as f64;

    // Values are sorted, so a neighborhood is a contiguous index window.
    let is_core: Vec<bool> = (0..n)
        .map(|i| {
            let lo = values.partition_point(|&v| v < values[i] - eps);
            let hi = values.partition_point(|&v| v <= values[i] + eps);
            hi - lo >= minpts
        })
        .collect();

    // Core points chain into one cluster while consecutive cores are
    // within eps of each other.
    const NOISE: usize = usize::MAX;
    let mut cluster = vec![NOISE; n];
    let mut n_clusters = 0;
    let mut prev_core: Option<usize> = None;
    for i in 0..n {
        if !is_core[i] {
            continue;
        }
        match prev_core {
            Some(p) if values[i] - values[p] <= eps => cluster[i] = cluster[p],
            _ => {
                cluster[i] = n_clusters;
                n_clusters += 1;
            }
        }
        prev_core = Some(i);
    }
    // Border points join the nearest core's cluster; an exact tie goes left.
    let core_indices: Vec<usize> = (0..n).filter(|&i| is_core[i]).collect();
    for i in 0..n {
        if is_core[i] {
            continue;
        }
        let right = core_indices.partition_point(|&c| c < i);
        let left = right.checked_sub(1).map(|p| core_indices[p]);
        let right = core_indices.get(right).copied();
        let nearest = match (left, right) {
            (Some(l), Some(r)) => {
                if values[i] - values[l] <= values[r] - values[i] {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => continue,
        };
        if (values[i] - values[nearest]).abs() <= eps {
            cluster[i] = cluster[nearest];
        }
    }

    let mut mass = vec![0.0; n_clusters];
    let mut weighted = vec![0.0; n_clusters];
    let mut pairs = Vec::new();
    for (i, (v, p)) in x.iter().enumerate() {
        if cluster[i] == NOISE {
            pairs.push((v, p));
        } else {
            mass[cluster[i]] += p;
            weighted[cluster[i]] += v * p;
        }
    }
    pairs.extend((0..n_clusters).map(|c| (weighted[c] / mass[c], mass[c])));
    Drv::from_weighted(pairs).expect("clusters and noise cover the whole support")
}

/// k bin centers evenly spaced over the support range; each input point
/// splits its mass between the two enclosing centers in linear proportion
/// to its distance from each. Empty bins are dropped. The split is mean
/// preserving by construction.
pub fn aggregate_unibins(x: &Drv, k: usize) -> Drv {
    assert!(k >= 2, "aggregation bound must be at least 2");
    if x.len() <= 1 {
        return x.clone();
    }
    let centers = linspace(x.min(), x.max(), k);
    let step = (x.max() - x.min()) / (k - 1) as f64;
    let mut mass = vec![0.0; k];
    for (v, p) in x.iter() {
        let j = (((v - x.min()) / step) as usize).min(k - 2);
        let (lo, hi) = (centers[j], centers[j + 1]);
        let mu_hi = (v - lo) / (hi - lo);
        mass[j] += (1.0 - mu_hi) * p;
        mass[j + 1] += mu_hi * p;
    }
    let pairs = centers.into_iter().zip(mass).filter(|&(_, p)| p > 0.0);
    Drv::from_weighted(pairs).expect("some bin received mass")
}

/// The interpolated quantiles of `x` at the k mid-ranks (j - 1/2)/k, each
/// paired with probability 1/k: the percentile_rank output before
/// coalescing merges quantiles that landed on the same value.
pub fn percentile_rank_pairs(x: &Drv, k: usize) -> Vec<(f64, f64)> {
    // Each support point sits at the midpoint of its own mass interval on
    // the cumulative axis; ranks between points interpolate linearly, so
    // where an output lands between two inputs depends on the residual
    // rank mass between their midpoints.
    let mut mids = Vec::with_capacity(x.len());
    let mut cum = 0.0;
    for (_, p) in x.iter() {
        mids.push(cum + p / 2.0);
        cum += p;
    }
    let values = x.values();
    let dp = 1.0 / k as f64;
    (1..=k)
        .map(|j| {
            let rank = (j as f64 - 0.5) * dp;
            let pos = mids.partition_point(|&m| m <= rank);
            let v = if pos == 0 {
                values[0]
            } else if pos == mids.len() {
                values[values.len() - 1]
            } else {
                let t = (rank - mids[pos - 1]) / (mids[pos] - mids[pos - 1]);
                values[pos - 1] + t * (values[pos] - values[pos - 1])
            };
            (v, dp)
        })
        .collect()
}

/// Equal-mass resampling: k values at the interpolated inverse CDF of the
/// mid-ranks (j - 1/2)/k, each carrying probability 1/k. Coalescing can
/// merge quantiles that land together, so the output may have fewer than
/// k entries.
pub fn aggregate_percentile_rank(x: &Drv, k: usize) -> Drv {
    assert!(k >= 2, "aggregation bound must be at least 2");
    if x.len() <= 1 {
        return x.clone();
    }
    Drv::from_weighted(percentile_rank_pairs(x, k)).expect("k quantiles always exist")
}
