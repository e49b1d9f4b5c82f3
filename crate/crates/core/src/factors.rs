//! Factor-count selection (Horn's parallel analysis), iterated principal-axis
//! extraction, varimax rotation, fit indices and regression factor scores.
//!
//! Fit indices follow the usual exploratory-factor-analysis conventions, which
//! differ between packages. Here the model chi-square is the maximum-likelihood
//! discrepancy evaluated at the principal-axis solution,
//!
//! ```text
//! F   = ln|Σ̂| − ln|R| + tr(R·Σ̂⁻¹) − p,   Σ̂ = ΛΛᵀ + diag(1 − h²)
//! χ²  = (n − 1)·F,                      df = ((p − m)² − (p + m)) / 2
//! TLI = (χ²₀/df₀ − χ²/df) / (χ²₀/df₀ − 1)   (independence model as baseline)
//! RMSEA = √(max(χ² − df, 0) / (df·(n − 1)))
//! BIC = χ² − df·ln n
//! ```
//!
//! with no Bartlett small-sample correction. Values will not match software
//! that applies one.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::adequacy::CorrelationMatrix;
use crate::corpus::OccupationMatrix;
use crate::error::{Error, Result};
use crate::linalg;

/// Labels used when none are configured; the seventh dimension is unnamed.
pub const DEFAULT_FACTOR_LABELS: [&str; 7] = [
    "problem-solving",
    "negotiation",
    "hazard",
    "empathy",
    "artistic",
    "coordination",
    "unnamed-7",
];

/// `m` labels from `labels`, padded with `unnamed-<k>`.
pub fn factor_labels(labels: &[String], m: usize) -> Vec<String> {
    (0..m)
        .map(|j| {
            labels
                .get(j)
                .cloned()
                .unwrap_or_else(|| format!("unnamed-{}", j + 1))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParallelAnalysisOptions {
    pub replicates: usize,
    pub quantile: f64,
    pub seed: u64,
}

impl ParallelAnalysisOptions {
    pub fn with_seed(seed: u64) -> Self {
        ParallelAnalysisOptions {
            replicates: 100,
            quantile: 0.95,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParallelAnalysisResult {
    pub observed_eigenvalues: Vec<f64>,
    pub reference_eigenvalues: Vec<f64>,
    pub suggested_factors: usize,
    pub replicates: usize,
    pub quantile: f64,
    pub seed: u64,
}

/// Horn's parallel analysis on principal-component eigenvalues.
///
/// Replicate `r` draws from its own ChaCha stream `(seed, r)`, so the
/// envelope does not depend on how replicates are scheduled across threads.
pub fn parallel_analysis(
    matrix: &OccupationMatrix,
    options: ParallelAnalysisOptions,
) -> Result<ParallelAnalysisResult> {
    let ParallelAnalysisOptions {
        replicates,
        quantile,
        seed,
    } = options;
    if replicates == 0 {
        return Err(Error::Parameter("parallel analysis needs at least 1 replicate".into()));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::Parameter(format!("quantile {quantile} outside (0, 1)")));
    }
    let (n, p) = matrix.values.shape();
    if p < 2 || n <= p {
        return Err(Error::Parameter(format!(
            "parallel analysis needs n > p >= 2 (n = {n}, p = {p})"
        )));
    }

    let observed_r = column_correlation(&matrix.values, &matrix.attribute_ids)?;
    let observed = linalg::jacobi_eigen(&observed_r)?.values;

    let per_replicate: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let noise = DMatrix::from_fn(n, p, |_, _| StandardNormal.sample(&mut rng));
            let ids: Vec<String> = Vec::new();
            let corr = column_correlation(&noise, &ids)?;
            Ok(linalg::jacobi_eigen(&corr)?.values)
        })
        .collect::<Result<_>>()?;

    let reference: Vec<f64> = (0..p)
        .map(|rank| {
            let mut column: Vec<f64> = per_replicate.iter().map(|ev| ev[rank]).collect();
            column.sort_by(f64::total_cmp);
            quantile_type7(&column, quantile)
        })
        .collect();
    let suggested = observed
        .iter()
        .zip(&reference)
        .filter(|(o, r)| o > r)
        .count();
    Ok(ParallelAnalysisResult {
        observed_eigenvalues: observed,
        reference_eigenvalues: reference,
        suggested_factors: suggested,
        replicates,
        quantile,
        seed,
    })
}

/// Linear-interpolation sample quantile of sorted data (Hyndman-Fan type 7).
pub fn quantile_type7(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

// Pearson correlation of raw columns; `ids` only names degenerate columns.
fn column_correlation(x: &DMatrix<f64>, ids: &[String]) -> Result<DMatrix<f64>> {
    let (n, p) = x.shape();
    let mut z = x.clone();
    for (j, mut col) in z.column_iter_mut().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        if !(ss > 0.0) {
            let name = ids.get(j).cloned().unwrap_or_else(|| format!("column {j}"));
            return Err(Error::DegenerateColumn(name));
        }
        let norm = ss.sqrt();
        col.iter_mut().for_each(|v| *v = (*v - mean) / norm);
    }
    let mut r = z.transpose() * &z;
    for i in 0..p {
        r[(i, i)] = 1.0;
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PafOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PafOptions {
    fn default() -> Self {
        PafOptions {
            tol: 1e-6,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitIndices {
    /// Root mean square of off-diagonal residuals.
    pub rmsr: f64,
    /// Model chi-square; `None` when the implied matrix is not positive definite.
    pub chi_square: Option<f64>,
    /// May be zero or negative for saturated or over-parameterized models.
    pub df: i64,
    pub baseline_chi_square: f64,
    pub baseline_df: i64,
    pub tli: Option<f64>,
    pub rmsea: Option<f64>,
    pub bic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorSolution {
    /// `p × m` loadings.
    pub loadings: DMatrix<f64>,
    pub communalities: Vec<f64>,
    /// `m × m` orthonormal matrix with `rotated = unrotated · rotation`.
    pub rotation: DMatrix<f64>,
    /// Leading eigenvalues of the final reduced correlation matrix.
    pub eigenvalues: Vec<f64>,
    /// `n × m`; empty (zero rows) until scores are computed.
    pub scores: DMatrix<f64>,
    pub factor_labels: Option<Vec<String>>,
    pub fit: Option<FitIndices>,
    pub iterations: usize,
    pub warnings: Vec<String>,
}

impl FactorSolution {
    pub fn n_factors(&self) -> usize {
        self.loadings.ncols()
    }

    /// Column sums of squared loadings.
    pub fn ss_loadings(&self) -> Vec<f64> {
        self.loadings
            .column_iter()
            .map(|c| c.iter().map(|x| x * x).sum())
            .collect()
    }

    /// Reduced correlation matrix with `communalities` on the diagonal.
    pub fn reduced_matrix(r: &CorrelationMatrix, communalities: &[f64]) -> DMatrix<f64> {
        let mut a = r.values.clone();
        for (i, h) in communalities.iter().enumerate() {
            a[(i, i)] = *h;
        }
        a
    }
}

fn row_sums_sq(loadings: &DMatrix<f64>) -> Vec<f64> {
    loadings
        .row_iter()
        .map(|r| r.iter().map(|x| x * x).sum())
        .collect()
}

/// Flips each column so that its largest-magnitude entry is positive.
fn fix_signs(loadings: &mut DMatrix<f64>, rotation: Option<&mut DMatrix<f64>>) {
    let mut flips = Vec::new();
    for j in 0..loadings.ncols() {
        let col = loadings.column(j);
        let mut best = 0;
        for i in 1..col.len() {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        if col.len() > 0 && col[best] < 0.0 {
            flips.push(j);
        }
    }
    for &j in &flips {
        loadings.column_mut(j).neg_mut();
    }
    if let Some(rot) = rotation {
        for &j in &flips {
            rot.column_mut(j).neg_mut();
        }
    }
}

/// Iterated principal-axis factoring starting from squared multiple
/// correlations `1 − 1/diag(R⁻¹)`.
pub fn extract_paf(r: &CorrelationMatrix, m: usize, options: PafOptions) -> Result<FactorSolution> {
    let p = r.dim();
    if m == 0 || m >= p {
        return Err(Error::Parameter(format!(
            "factor count must satisfy 1 <= m < p (m = {m}, p = {p})"
        )));
    }
    if options.max_iter == 0 || !(options.tol > 0.0) {
        return Err(Error::Parameter("PAF needs tol > 0 and max_iter >= 1".into()));
    }
    let inv = linalg::inverse_spd(&r.values)?;
    let mut h: Vec<f64> = (0..p).map(|i| (1.0 - 1.0 / inv[(i, i)]).max(0.0)).collect();

    let mut warnings = Vec::new();
    let mut heywood = vec![false; p];
    let mut iterations = 0;
    let mut delta = f64::INFINITY;
    let mut loadings = DMatrix::zeros(p, m);
    let mut eigenvalues = vec![0.0; m];
    while iterations < options.max_iter {
        iterations += 1;
        let reduced = FactorSolution::reduced_matrix(r, &h);
        let eig = linalg::jacobi_eigen(&reduced)?;
        for j in 0..m {
            let scale = eig.values[j].max(0.0).sqrt();
            for i in 0..p {
                loadings[(i, j)] = eig.vectors[(i, j)] * scale;
            }
        }
        eigenvalues.copy_from_slice(&eig.values[..m]);
        let mut next = row_sums_sq(&loadings);
        for (i, hi) in next.iter_mut().enumerate() {
            if *hi > 1.0 {
                *hi = 1.0;
                heywood[i] = true;
            }
        }
        delta = next
            .iter()
            .zip(&h)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        h = next;
        if delta < options.tol {
            break;
        }
    }
    if delta >= options.tol {
        return Err(Error::Convergence {
            routine: "principal-axis factoring",
            iterations,
            delta,
        });
    }

    // Heywood rows are scaled back onto the unit sphere so that loadings and
    // communalities stay consistent.
    for i in 0..p {
        let ss: f64 = loadings.row(i).iter().map(|x| x * x).sum();
        if ss > 1.0 {
            heywood[i] = true;
            loadings.row_mut(i).scale_mut(1.0 / ss.sqrt());
        }
    }
    for (i, &hw) in heywood.iter().enumerate() {
        if hw {
            warnings.push(format!(
                "Heywood case: communality of `{}` exceeded 1 and was clamped",
                r.ids[i]
            ));
        }
    }
    fix_signs(&mut loadings, None);
    let communalities = row_sums_sq(&loadings);
    Ok(FactorSolution {
        loadings,
        communalities,
        rotation: DMatrix::identity(m, m),
        eigenvalues,
        scores: DMatrix::zeros(0, m),
        factor_labels: None,
        fit: None,
        iterations,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarimaxOptions {
    /// Kaiser row normalization.
    pub normalize: bool,
    /// Sweep stops once every pairwise angle is below this (radians).
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for VarimaxOptions {
    fn default() -> Self {
        VarimaxOptions {
            normalize: false,
            tol: 1e-10,
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Varimax {
    pub loadings: DMatrix<f64>,
    pub rotation: DMatrix<f64>,
    /// Raw varimax criterion before the first sweep and after each sweep.
    pub criterion_trace: Vec<f64>,
    pub sweeps: usize,
}

/// Raw varimax criterion `Σⱼ [ mean(λ⁴) − mean(λ²)² ]` over columns.
pub fn varimax_criterion(loadings: &DMatrix<f64>) -> f64 {
    let p = loadings.nrows() as f64;
    loadings
        .column_iter()
        .map(|c| {
            let s2: f64 = c.iter().map(|x| x * x).sum::<f64>() / p;
            let s4: f64 = c.iter().map(|x| x.powi(4)).sum::<f64>() / p;
            s4 - s2 * s2
        })
        .sum()
}

/// Pairwise (Kaiser) varimax rotation.
///
/// Each plane rotation maximizes the criterion restricted to its column pair,
/// so the criterion is non-decreasing sweep over sweep. The returned columns
/// are sign-fixed and ordered by decreasing sum of squared loadings.
pub fn varimax(loadings: &DMatrix<f64>, options: VarimaxOptions) -> Result<Varimax> {
    let (p, m) = loadings.shape();
    if m == 0 {
        return Err(Error::Parameter("varimax needs at least one factor".into()));
    }
    if options.max_iter == 0 {
        return Err(Error::Parameter("varimax needs max_iter >= 1".into()));
    }
    let mut work = loadings.clone();
    let weights: Vec<f64> = row_sums_sq(loadings).into_iter().map(f64::sqrt).collect();
    if options.normalize {
        for i in 0..p {
            if weights[i] > 0.0 {
                work.row_mut(i).scale_mut(1.0 / weights[i]);
            }
        }
    }
    let mut rotation = DMatrix::<f64>::identity(m, m);
    let mut trace = vec![varimax_criterion(&work)];
    let mut sweeps = 0;
    if m > 1 {
        let pf = p as f64;
        loop {
            if sweeps == options.max_iter {
                return Err(Error::Convergence {
                    routine: "varimax",
                    iterations: sweeps,
                    delta: trace[trace.len() - 1] - trace[trace.len() - 2],
                });
            }
            sweeps += 1;
            let before = (work.clone(), rotation.clone());
            let mut largest = 0.0f64;
            for j in 0..m {
                for k in (j + 1)..m {
                    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
                    for i in 0..p {
                        let x = work[(i, j)];
                        let y = work[(i, k)];
                        let u = x * x - y * y;
                        let v = 2.0 * x * y;
                        a += u;
                        b += v;
                        c += u * u - v * v;
                        d += 2.0 * u * v;
                    }
                    let num = d - 2.0 * a * b / pf;
                    let den = c - (a * a - b * b) / pf;
                    let phi = 0.25 * num.atan2(den);
                    largest = largest.max(phi.abs());
                    if phi == 0.0 {
                        continue;
                    }
                    let (s, co) = phi.sin_cos();
                    rotate_columns(&mut work, j, k, co, s);
                    rotate_columns(&mut rotation, j, k, co, s);
                }
            }
            let criterion = varimax_criterion(&work);
            if criterion < trace[trace.len() - 1] {
                // rounding noise at the optimum: keep the better previous sweep
                (work, rotation) = before;
                break;
            }
            trace.push(criterion);
            if largest < options.tol {
                break;
            }
        }
    }
    if options.normalize {
        for i in 0..p {
            if weights[i] > 0.0 {
                work.row_mut(i).scale_mut(weights[i]);
            }
        }
    }
    fix_signs(&mut work, Some(&mut rotation));

    let ss: Vec<f64> = work
        .column_iter()
        .map(|c| c.iter().map(|x| x * x).sum())
        .collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| ss[b].total_cmp(&ss[a]).then(a.cmp(&b)));
    let work = DMatrix::from_fn(p, m, |i, j| work[(i, order[j])]);
    let rotation = DMatrix::from_fn(m, m, |i, j| rotation[(i, order[j])]);
    Ok(Varimax {
        loadings: work,
        rotation,
        criterion_trace: trace,
        sweeps,
    })
}

fn rotate_columns(a: &mut DMatrix<f64>, j: usize, k: usize, c: f64, s: f64) {
    for i in 0..a.nrows() {
        let x = a[(i, j)];
        let y = a[(i, k)];
        a[(i, j)] = c * x + s * y;
        a[(i, k)] = -s * x + c * y;
    }
}

/// Rotates `solution` in place with varimax.
pub fn rotate(solution: &mut FactorSolution, options: VarimaxOptions) -> Result<()> {
    let v = varimax(&solution.loadings, options)?;
    solution.rotation = &solution.rotation * &v.rotation;
    solution.loadings = v.loadings;
    solution.communalities = row_sums_sq(&solution.loadings);
    Ok(())
}

/// Residual and chi-square based fit indices for an `m`-factor solution.
pub fn fit_indices(r: &CorrelationMatrix, loadings: &DMatrix<f64>, n: usize) -> Result<FitIndices> {
    let (p, m) = loadings.shape();
    if p != r.dim() {
        return Err(Error::Parameter("loadings do not match the correlation matrix".into()));
    }
    if n < 2 {
        return Err(Error::Parameter("fit indices need n >= 2".into()));
    }
    let common = loadings * loadings.transpose();
    let mut ss = 0.0;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                let e = r.values[(i, j)] - common[(i, j)];
                ss += e * e;
            }
        }
    }
    let rmsr = if p > 1 {
        (ss / (p * (p - 1)) as f64).sqrt()
    } else {
        0.0
    };

    let nf = n as f64;
    let ln_det_r = linalg::ln_det_spd(&r.values)?;
    let baseline_df = (p * (p - 1) / 2) as i64;
    let baseline_chi_square = ((nf - 1.0) * -ln_det_r).max(0.0);

    let mut implied = common;
    for i in 0..p {
        implied[(i, i)] = 1.0;
    }
    let pi = p as i64;
    let mi = m as i64;
    let df = ((pi - mi) * (pi - mi) - (pi + mi)) / 2;
    let chi_square = match (
        linalg::ln_det_spd(&implied),
        linalg::inverse_spd(&implied),
    ) {
        (Ok(ln_det_implied), Ok(inv)) => {
            let trace = (&r.values * inv).trace();
            let f = ln_det_implied - ln_det_r + trace - p as f64;
            Some(((nf - 1.0) * f).max(0.0))
        }
        _ => None,
    };

    let tli = chi_square.and_then(|chi| {
        if df <= 0 || baseline_df <= 0 {
            return None;
        }
        let base = baseline_chi_square / baseline_df as f64;
        let denom = base - 1.0;
        (denom != 0.0).then(|| (base - chi / df as f64) / denom)
    });
    let rmsea = chi_square.and_then(|chi| {
        (df > 0).then(|| ((chi - df as f64).max(0.0) / (df as f64 * (nf - 1.0))).sqrt())
    });
    let bic = chi_square.map(|chi| chi - df as f64 * nf.ln());
    Ok(FitIndices {
        rmsr,
        chi_square,
        df,
        baseline_chi_square,
        baseline_df,
        tli,
        rmsea,
        bic,
    })
}

/// Regression (Thurstone) scores `Z · R⁻¹ · Λ`.
pub fn factor_scores(
    matrix: &OccupationMatrix,
    r: &CorrelationMatrix,
    loadings: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if !matrix.standardized {
        return Err(Error::Parameter("factor scores need a standardized matrix".into()));
    }
    if matrix.attribute_ids != r.ids || loadings.nrows() != r.dim() {
        return Err(Error::Parameter(
            "matrix columns, correlation ids and loadings rows must align".into(),
        ));
    }
    let inv = linalg::inverse_spd(&r.values)?;
    let weights = inv * loadings;
    Ok(&matrix.values * weights)
}
