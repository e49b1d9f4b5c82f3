//! Quantile-based susceptibility flags and medoid-based vulnerable-cluster
//! labeling.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterSolution;
use crate::corpus::SocCode;
use crate::error::{Error, Result};

/// Type name for occupations that satisfy no criterion.
pub const NO_TYPE: &str = "none";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Top,
    Bottom,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SusceptibilityCriterion {
    pub factor_index: usize,
    pub direction: Direction,
    pub fraction: f64,
    pub label: String,
}

impl SusceptibilityCriterion {
    pub fn new(factor_index: usize, direction: Direction, fraction: f64, label: &str) -> Self {
        SusceptibilityCriterion {
            factor_index,
            direction,
            fraction,
            label: label.to_owned(),
        }
    }
}

/// Number of occupations flagged by a `fraction` criterion over `n` rows,
/// `⌈fraction·n⌉`. Products within 1e-9 of an integer are not rounded up,
/// so `0.1·30` flags 3 rather than 4.
pub fn flag_count(fraction: f64, n: usize) -> usize {
    let x = fraction * n as f64;
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest as usize
    } else {
        x.ceil() as usize
    }
}

/// Per-occupation criterion outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Susceptibility {
    pub criteria: Vec<SusceptibilityCriterion>,
    /// `satisfied[i]` lists criterion indices (ascending) met by row `i`.
    pub satisfied: Vec<Vec<usize>>,
}

impl Susceptibility {
    /// Satisfied labels joined with `+`, or `none`.
    pub fn type_of(&self, row: usize) -> String {
        if self.satisfied[row].is_empty() {
            NO_TYPE.to_owned()
        } else {
            self.satisfied[row]
                .iter()
                .map(|&c| self.criteria[c].label.as_str())
                .collect::<Vec<_>>()
                .join("+")
        }
    }

    pub fn flagged(&self, criterion: usize) -> usize {
        self.satisfied.iter().filter(|s| s.contains(&criterion)).count()
    }

    /// Distinct non-empty types observed.
    pub fn observed_types(&self) -> BTreeSet<String> {
        (0..self.satisfied.len())
            .filter(|&i| !self.satisfied[i].is_empty())
            .map(|i| self.type_of(i))
            .collect()
    }
}

fn validate_criteria(criteria: &[SusceptibilityCriterion], m: usize) -> Result<()> {
    if criteria.is_empty() {
        return Err(Error::Parameter("at least one susceptibility criterion is required".into()));
    }
    let mut labels = BTreeSet::new();
    for c in criteria {
        if !(c.fraction > 0.0 && c.fraction < 1.0) {
            return Err(Error::Parameter(format!(
                "criterion `{}`: fraction {} outside (0, 1)",
                c.label, c.fraction
            )));
        }
        if c.factor_index >= m {
            return Err(Error::Parameter(format!(
                "criterion `{}`: factor {} out of range for {m} factors",
                c.label, c.factor_index
            )));
        }
        if c.label.is_empty() || c.label == NO_TYPE || c.label.contains('+') {
            return Err(Error::Parameter(format!("invalid criterion label `{}`", c.label)));
        }
        if !labels.insert(c.label.as_str()) {
            return Err(Error::Parameter(format!("duplicate criterion label `{}`", c.label)));
        }
    }
    Ok(())
}

/// Flags the `⌈fraction·n⌉` highest (or lowest) scorers for each criterion.
/// Ties at the cutoff go to the lower row index.
pub fn score_criteria(
    scores: &DMatrix<f64>,
    criteria: &[SusceptibilityCriterion],
) -> Result<Susceptibility> {
    let (n, m) = scores.shape();
    validate_criteria(criteria, m)?;
    let mut satisfied = vec![Vec::new(); n];
    for (ci, c) in criteria.iter().enumerate() {
        let count = flag_count(c.fraction, n);
        if c.fraction * (n as f64) < 1.0 - 1e-9 {
            return Err(Error::Parameter(format!(
                "criterion `{}` flags no occupation ({} x {n} < 1)",
                c.label, c.fraction
            )));
        }
        let col = scores.column(c.factor_index);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let by_score = match c.direction {
                Direction::Top => col[b].total_cmp(&col[a]),
                Direction::Bottom => col[a].total_cmp(&col[b]),
            };
            by_score.then(a.cmp(&b))
        });
        for &row in &order[..count] {
            satisfied[row].push(ci);
        }
    }
    Ok(Susceptibility {
        criteria: criteria.to_vec(),
        satisfied,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterLabeling {
    pub susceptible_factors: Vec<usize>,
    pub bottleneck_factors: Vec<usize>,
    pub threshold_sd: f64,
}

/// A cluster is vulnerable when its medoid's mean score over the
/// susceptible factors exceeds `+threshold_sd`, or its mean over the
/// bottleneck factors is below `−threshold_sd`.
pub fn label_clusters(
    solution: &ClusterSolution,
    scores: &DMatrix<f64>,
    labeling: &ClusterLabeling,
) -> Result<BTreeSet<usize>> {
    let ClusterLabeling {
        susceptible_factors,
        bottleneck_factors,
        threshold_sd,
    } = labeling;
    if susceptible_factors.is_empty() || bottleneck_factors.is_empty() {
        return Err(Error::Parameter(
            "susceptible and bottleneck factor sets must both be non-empty".into(),
        ));
    }
    let m = scores.ncols();
    for &f in susceptible_factors.iter().chain(bottleneck_factors) {
        if f >= m {
            return Err(Error::Parameter(format!("factor {f} out of range for {m} factors")));
        }
    }
    if susceptible_factors.iter().any(|f| bottleneck_factors.contains(f)) {
        return Err(Error::Parameter(
            "susceptible and bottleneck factor sets must be disjoint".into(),
        ));
    }
    if solution.assignment.len() != scores.nrows() {
        return Err(Error::Parameter("cluster solution and scores are not aligned".into()));
    }
    let mean_over = |row: usize, factors: &[usize]| {
        factors.iter().map(|&f| scores[(row, f)]).sum::<f64>() / factors.len() as f64
    };
    Ok(solution
        .medoids
        .iter()
        .enumerate()
        .filter(|&(_, &medoid)| {
            mean_over(medoid, susceptible_factors) > *threshold_sd
                || mean_over(medoid, bottleneck_factors) < -*threshold_sd
        })
        .map(|(c, _)| c)
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VulnerabilityReport {
    pub criteria: Vec<SusceptibilityCriterion>,
    pub threshold_sd: f64,
    pub occupation_ids: Vec<SocCode>,
    pub cluster: Vec<usize>,
    pub satisfied: Vec<Vec<usize>>,
    pub susceptibility_type: Vec<String>,
    pub vulnerable_clusters: BTreeSet<usize>,
    /// Members of the vulnerable clusters, sorted by SOC code.
    pub vulnerable_occupations: Vec<SocCode>,
}

impl VulnerabilityReport {
    pub fn is_vulnerable(&self, row: usize) -> bool {
        self.vulnerable_clusters.contains(&self.cluster[row])
    }

    /// Criterion labels satisfied by `row`, in criterion order.
    pub fn criteria_satisfied(&self, row: usize) -> Vec<&str> {
        self.satisfied[row]
            .iter()
            .map(|&c| self.criteria[c].label.as_str())
            .collect()
    }

    /// `(cluster, size, vulnerable)` for every cluster id present.
    pub fn cluster_counts(&self) -> Vec<(usize, usize, bool)> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &c in &self.cluster {
            *counts.entry(c).or_default() += 1;
        }
        counts
            .into_iter()
            .map(|(c, size)| (c, size, self.vulnerable_clusters.contains(&c)))
            .collect()
    }

    /// Occupations per susceptibility type.
    pub fn type_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for t in &self.susceptibility_type {
            *counts.entry(t.clone()).or_default() += 1;
        }
        counts
    }

    pub fn non_vulnerable_occupations(&self) -> Vec<SocCode> {
        let vulnerable: BTreeSet<&SocCode> = self.vulnerable_occupations.iter().collect();
        let mut out: Vec<SocCode> = self
            .occupation_ids
            .iter()
            .filter(|c| !vulnerable.contains(c))
            .cloned()
            .collect();
        out.sort();
        out
    }
}

/// Assembles the final report. No ranking of vulnerability is attempted.
pub fn vulnerable_list(
    occupation_ids: &[SocCode],
    solution: &ClusterSolution,
    susceptibility: &Susceptibility,
    vulnerable_clusters: BTreeSet<usize>,
    threshold_sd: f64,
) -> Result<VulnerabilityReport> {
    let n = occupation_ids.len();
    if solution.assignment.len() != n || susceptibility.satisfied.len() != n {
        return Err(Error::Parameter(
            "occupation ids, clusters and susceptibility flags must align".into(),
        ));
    }
    let mut vulnerable_occupations: Vec<SocCode> = (0..n)
        .filter(|&i| vulnerable_clusters.contains(&solution.assignment[i]))
        .map(|i| occupation_ids[i].clone())
        .collect();
    vulnerable_occupations.sort();
    Ok(VulnerabilityReport {
        criteria: susceptibility.criteria.clone(),
        threshold_sd,
        occupation_ids: occupation_ids.to_vec(),
        cluster: solution.assignment.clone(),
        satisfied: susceptibility.satisfied.clone(),
        susceptibility_type: (0..n).map(|i| susceptibility.type_of(i)).collect(),
        vulnerable_clusters,
        vulnerable_occupations,
    })
}
