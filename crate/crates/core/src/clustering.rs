//! k-medoids clustering (PAM: greedy BUILD followed by best-improvement SWAP),
//! silhouette validation and silhouette-driven choice of k.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Euclidean,
    Manhattan,
}

impl Metric {
    pub fn distance(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Manhattan => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Euclidean => "euclidean",
            Metric::Manhattan => "manhattan",
        }
    }
}

/// Symmetric pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    pub ids: Vec<String>,
    pub values: DMatrix<f64>,
    pub metric: Metric,
}

impl DissimilarityMatrix {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }
}

/// Pairwise distances between the rows of `points`.
pub fn dissimilarity_matrix(
    points: &DMatrix<f64>,
    ids: Vec<String>,
    metric: Metric,
) -> Result<DissimilarityMatrix> {
    let n = points.nrows();
    if n < 2 {
        return Err(Error::Parameter(format!("need at least 2 points, got {n}")));
    }
    if ids.len() != n {
        return Err(Error::Parameter("one id per point is required".into()));
    }
    let rows: Vec<Vec<f64>> = points
        .row_iter()
        .map(|r| r.iter().copied().collect())
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.distance(&rows[i], &rows[j]);
            values[(i, j)] = d;
            values[(j, i)] = d;
        }
    }
    Ok(DissimilarityMatrix {
        ids,
        values,
        metric,
    })
}

/// How PAM picks its starting medoids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode")]
pub enum PamInit {
    /// Deterministic greedy BUILD.
    #[default]
    Build,
    /// `k` distinct points drawn uniformly with the given seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Silhouette {
    pub values: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSolution {
    pub k: usize,
    /// Medoid point indices, ascending; cluster `c` is represented by `medoids[c]`.
    pub medoids: Vec<usize>,
    pub assignment: Vec<usize>,
    pub cost_z: f64,
    /// `None` when fewer than two clusters exist.
    pub silhouette: Option<Silhouette>,
    /// Total cost after BUILD and after each applied swap.
    pub cost_trace: Vec<f64>,
}

impl ClusterSolution {
    pub fn mean_silhouette(&self) -> Option<f64> {
        self.silhouette.as_ref().map(|s| s.mean)
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = usize> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter(move |(_, &c)| c == cluster)
            .map(|(i, _)| i)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }
}

/// Nearest-medoid assignment and its total cost. Medoids always claim
/// themselves; other ties go to the lowest cluster index.
pub fn assign(d: &DissimilarityMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let n = d.len();
    let mut assignment = vec![0; n];
    let mut cost = 0.0;
    for (i, slot) in assignment.iter_mut().enumerate() {
        if let Some(c) = medoids.iter().position(|&m| m == i) {
            *slot = c;
            continue;
        }
        let mut best = 0;
        let mut best_d = d.get(i, medoids[0]);
        for (c, &m) in medoids.iter().enumerate().skip(1) {
            let dm = d.get(i, m);
            if dm < best_d {
                best = c;
                best_d = dm;
            }
        }
        *slot = best;
        cost += best_d;
    }
    (assignment, cost)
}

fn build(d: &DissimilarityMatrix, k: usize) -> Vec<usize> {
    let n = d.len();
    let mut medoids = Vec::with_capacity(k);
    let mut first = 0;
    let mut first_total = f64::INFINITY;
    for j in 0..n {
        let total: f64 = (0..n).map(|i| d.get(i, j)).sum();
        if total < first_total {
            first = j;
            first_total = total;
        }
    }
    medoids.push(first);
    let mut nearest: Vec<f64> = (0..n).map(|i| d.get(i, first)).collect();
    let mut is_medoid = vec![false; n];
    is_medoid[first] = true;
    while medoids.len() < k {
        let mut best = usize::MAX;
        let mut best_gain = f64::NEG_INFINITY;
        for c in 0..n {
            if is_medoid[c] {
                continue;
            }
            let gain: f64 = (0..n).map(|i| (nearest[i] - d.get(i, c)).max(0.0)).sum();
            if gain > best_gain {
                best = c;
                best_gain = gain;
            }
        }
        medoids.push(best);
        is_medoid[best] = true;
        for (i, near) in nearest.iter_mut().enumerate() {
            *near = near.min(d.get(i, best));
        }
    }
    medoids
}

fn random_start(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::index::sample(&mut rng, n, k).into_vec()
}

/// Partitioning Around Medoids.
pub fn pam(d: &DissimilarityMatrix, k: usize, init: PamInit) -> Result<ClusterSolution> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::Parameter(format!("k must satisfy 1 <= k <= n (k = {k}, n = {n})")));
    }
    let mut medoids = match init {
        PamInit::Build => build(d, k),
        PamInit::Random { seed } => random_start(n, k, seed),
    };
    medoids.sort_unstable();
    let (_, mut cost) = assign(d, &medoids);
    let mut trace = vec![cost];

    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }
    loop {
        // current cluster/distance and distance to the next-closest medoid
        let (current, _) = assign(d, &medoids);
        let near: Vec<(usize, f64)> = current
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, d.get(i, medoids[c])))
            .collect();
        let second: Vec<f64> = (0..n)
            .map(|i| {
                medoids
                    .iter()
                    .enumerate()
                    .filter(|&(c, _)| c != near[i].0)
                    .map(|(_, &m)| d.get(i, m))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();

        let mut best: Option<(usize, usize, f64)> = None;
        for (c, _) in medoids.iter().enumerate() {
            for h in 0..n {
                if is_medoid[h] {
                    continue;
                }
                let mut delta = 0.0;
                for j in 0..n {
                    let djh = d.get(j, h);
                    if near[j].0 == c {
                        delta += djh.min(second[j]) - near[j].1;
                    } else if djh < near[j].1 {
                        delta += djh - near[j].1;
                    }
                }
                if best.is_none_or(|(_, _, b)| delta < b) {
                    best = Some((c, h, delta));
                }
            }
        }
        let Some((c, h, delta)) = best else { break };
        if !(delta < 0.0) {
            break;
        }
        let mut candidate = medoids.clone();
        candidate[c] = h;
        candidate.sort_unstable();
        let (_, new_cost) = assign(d, &candidate);
        if !(new_cost < cost) {
            // rounding made the predicted gain vanish
            break;
        }
        is_medoid[medoids[c]] = false;
        is_medoid[h] = true;
        medoids = candidate;
        cost = new_cost;
        trace.push(cost);
    }

    let (assignment, cost_z) = assign(d, &medoids);
    let silhouette = if k >= 2 {
        Some(silhouette(d, &assignment)?)
    } else {
        None
    };
    Ok(ClusterSolution {
        k,
        medoids,
        assignment,
        cost_z,
        silhouette,
        cost_trace: trace,
    })
}

/// Silhouette widths. Singleton clusters get `s = 0`.
pub fn silhouette(d: &DissimilarityMatrix, labels: &[usize]) -> Result<Silhouette> {
    let n = d.len();
    if labels.len() != n {
        return Err(Error::Parameter("one label per point is required".into()));
    }
    let n_labels = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; n_labels];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(Error::UndefinedSilhouette);
    }

    let mut values = Vec::with_capacity(n);
    let mut sums = vec![0.0; n_labels];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += d.get(i, j);
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            values.push(0.0);
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..n_labels)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let s = if a < b {
            1.0 - a / b
        } else if a > b {
            b / a - 1.0
        } else {
            0.0
        };
        values.push(s);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    Ok(Silhouette { values, mean })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KScanRow {
    pub k: usize,
    pub mean_silhouette: f64,
    pub cost_z: f64,
}

#[derive(Debug, Clone)]
pub struct KSelection {
    pub best_k: usize,
    pub table: Vec<KScanRow>,
    pub best: ClusterSolution,
}

/// Runs PAM for each `k` in `k_min..=k_max` and keeps the highest mean
/// silhouette, preferring the smaller k on ties.
pub fn select_k(
    d: &DissimilarityMatrix,
    k_min: usize,
    k_max: usize,
    init: PamInit,
) -> Result<KSelection> {
    let n = d.len();
    if k_min < 2 || k_min > k_max || k_max >= n {
        return Err(Error::Parameter(format!(
            "k range must satisfy 2 <= k_min <= k_max < n (got {k_min}..={k_max}, n = {n})"
        )));
    }
    let mut solutions: Vec<ClusterSolution> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| pam(d, k, init))
        .collect::<Result<_>>()?;
    let table: Vec<KScanRow> = solutions
        .iter()
        .map(|s| KScanRow {
            k: s.k,
            mean_silhouette: s.mean_silhouette().unwrap_or(f64::NAN),
            cost_z: s.cost_z,
        })
        .collect();
    let mut best = 0;
    for (i, row) in table.iter().enumerate() {
        if row.mean_silhouette > table[best].mean_silhouette {
            best = i;
        }
    }
    let best_k = table[best].k;
    Ok(KSelection {
        best_k,
        table,
        best: solutions.swap_remove(best),
    })
}
