//! Correlation matrix and factorability diagnostics (Bartlett's test of
//! sphericity, Kaiser-Meyer-Olkin measure of sampling adequacy).

use nalgebra::DMatrix;
use serde::Serialize;

use crate::corpus::OccupationMatrix;
use crate::error::{Error, Result};
use crate::linalg;

/// Condition number above which a warning is raised.
pub const CONDITION_WARNING: f64 = 1e12;
/// Tolerance on `‖R⁻¹·R − I‖∞` for the KMO conditioning guard.
pub const INVERSE_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub ids: Vec<String>,
    pub values: DMatrix<f64>,
}

impl CorrelationMatrix {
    /// Validates symmetry, unit diagonal and range.
    pub fn new(ids: Vec<String>, values: DMatrix<f64>) -> Result<Self> {
        let p = values.nrows();
        if values.ncols() != p || ids.len() != p {
            return Err(Error::Parameter("correlation matrix must be square".into()));
        }
        for i in 0..p {
            if (values[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Error::Parameter(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..p {
                let r = values[(i, j)];
                if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&r) {
                    return Err(Error::Parameter(format!("entry ({i},{j}) = {r} outside [-1,1]")));
                }
                if (r - values[(j, i)]).abs() > 1e-12 {
                    return Err(Error::Parameter(format!("entry ({i},{j}) is not symmetric")));
                }
            }
        }
        Ok(CorrelationMatrix { ids, values })
    }

    /// Equicorrelation matrix with off-diagonal `r`, mostly for tests.
    pub fn equicorrelated(p: usize, r: f64) -> Result<Self> {
        let values = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { r });
        Self::new((0..p).map(|i| format!("v{}", i + 1)).collect(), values)
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}

/// Pearson correlations of a standardized matrix, `ZᵀZ/(n−1)`.
pub fn correlation(matrix: &OccupationMatrix) -> Result<CorrelationMatrix> {
    if !matrix.standardized {
        return Err(Error::Parameter("correlation expects a standardized matrix".into()));
    }
    let n = matrix.n_occupations();
    if n < 3 {
        return Err(Error::Parameter(format!("need at least 3 occupations, got {n}")));
    }
    let z = &matrix.values;
    let p = z.ncols();
    let mut r = z.transpose() * z / (n as f64 - 1.0);
    for i in 0..p {
        r[(i, i)] = 1.0;
        for j in (i + 1)..p {
            let v = (0.5 * (r[(i, j)] + r[(j, i)])).clamp(-1.0, 1.0);
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix {
        ids: matrix.attribute_ids.clone(),
        values: r,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bartlett {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Upper-tail probability of the chi-square distribution.
pub fn chi_square_sf(x: f64, df: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    statrs::function::gamma::gamma_ur(df / 2.0, x / 2.0)
}

/// Bartlett's test of sphericity,
/// `χ² = −(n − 1 − (2p + 5)/6)·ln|R|` on `p(p−1)/2` degrees of freedom.
pub fn bartlett_test(r: &CorrelationMatrix, n: usize) -> Result<Bartlett> {
    let p = r.dim();
    if p < 2 {
        return Err(Error::Parameter("Bartlett's test needs at least 2 variables".into()));
    }
    if n <= p {
        return Err(Error::Parameter(format!(
            "Bartlett's test needs n > p (n = {n}, p = {p})"
        )));
    }
    let ln_det = linalg::ln_det_spd(&r.values)?;
    let factor = n as f64 - 1.0 - (2.0 * p as f64 + 5.0) / 6.0;
    let statistic = (-factor * ln_det).max(0.0);
    let df = p * (p - 1) / 2;
    Ok(Bartlett {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df as f64),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kmo {
    pub overall: f64,
    /// `NaN` for a variable uncorrelated with every other variable.
    pub per_variable: Vec<f64>,
    /// `‖R⁻¹·R − I‖∞`, reported so callers can flag ill-conditioning.
    pub inverse_residual: f64,
}

/// Kaiser-Meyer-Olkin measure from anti-image partial correlations
/// `u_ij = −R⁻¹_ij / √(R⁻¹_ii·R⁻¹_jj)`.
pub fn kmo(r: &CorrelationMatrix) -> Result<Kmo> {
    let p = r.dim();
    if p < 2 {
        return Err(Error::Parameter("KMO needs at least 2 variables".into()));
    }
    let inv = linalg::inverse_spd(&r.values)?;
    let inverse_residual = (&inv * &r.values - DMatrix::<f64>::identity(p, p)).amax();

    let mut per_variable = Vec::with_capacity(p);
    let (mut r2_total, mut u2_total) = (0.0, 0.0);
    for j in 0..p {
        let (mut r2, mut u2) = (0.0, 0.0);
        for i in 0..p {
            if i == j {
                continue;
            }
            let rij = r.values[(i, j)];
            let uij = -inv[(i, j)] / (inv[(i, i)] * inv[(j, j)]).sqrt();
            r2 += rij * rij;
            u2 += uij * uij;
        }
        r2_total += r2;
        u2_total += u2;
        per_variable.push(if r2 + u2 > 0.0 { r2 / (r2 + u2) } else { f64::NAN });
    }
    if r2_total == 0.0 {
        return Err(Error::UndefinedKmo);
    }
    Ok(Kmo {
        overall: r2_total / (r2_total + u2_total),
        per_variable,
        inverse_residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdequacyResult {
    pub bartlett: Bartlett,
    pub kmo_overall: f64,
    pub kmo_per_variable: Vec<(String, f64)>,
    pub condition_number: f64,
    pub warnings: Vec<String>,
}

/// Runs both diagnostics and collects conditioning warnings.
pub fn assess(r: &CorrelationMatrix, n: usize) -> Result<AdequacyResult> {
    let bartlett = bartlett_test(r, n)?;
    let k = kmo(r)?;
    let eig = linalg::jacobi_eigen(&r.values)?;
    let condition_number = linalg::condition_number_spd(&eig.values);
    let mut warnings = Vec::new();
    if condition_number > CONDITION_WARNING {
        warnings.push(format!(
            "correlation matrix is near-singular (condition number {condition_number:e})"
        ));
    }
    if k.inverse_residual > INVERSE_RESIDUAL_TOL {
        warnings.push(format!(
            "inverse correlation check residual {:e} exceeds {INVERSE_RESIDUAL_TOL:e}",
            k.inverse_residual
        ));
    }
    Ok(AdequacyResult {
        bartlett,
        kmo_overall: k.overall,
        kmo_per_variable: r.ids.iter().cloned().zip(k.per_variable).collect(),
        condition_number,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{standardize, SocCode};

    fn two_by_two(r: f64) -> CorrelationMatrix {
        CorrelationMatrix::equicorrelated(2, r).unwrap()
    }

    fn matrix(cols: &[&[f64]]) -> OccupationMatrix {
        let n = cols[0].len();
        let ids = (0..n)
            .map(|i| SocCode::parse(&format!("11-{:04}", 1000 + i)).unwrap())
            .collect();
        let values = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        let attrs = (0..cols.len()).map(|j| format!("a{j}")).collect();
        OccupationMatrix::new(ids, attrs, values, false).unwrap()
    }

    #[test]
    fn perfect_and_inverse_correlation() {
        let z = standardize(&matrix(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0], &[3.0, 2.0, 1.0]]))
            .unwrap();
        let r = correlation(&z).unwrap();
        assert!((r.values[(0, 1)] - 1.0).abs() < 1e-12);
        assert!((r.values[(0, 2)] + 1.0).abs() < 1e-12);
        assert_eq!(r.values[(1, 1)], 1.0);
    }

    #[test]
    fn correlation_requires_standardized() {
        let m = matrix(&[&[1.0, 2.0, 3.0]]);
        assert!(correlation(&m).is_err());
    }

    #[test]
    fn bartlett_identity() {
        let r = CorrelationMatrix::equicorrelated(5, 0.0).unwrap();
        let b = bartlett_test(&r, 50).unwrap();
        assert_eq!(b.statistic, 0.0);
        assert_eq!(b.df, 10);
        assert!((b.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bartlett_two_variables() {
        let b = bartlett_test(&two_by_two(0.6), 100).unwrap();
        assert_eq!(b.df, 1);
        assert!((b.statistic - 97.5 * -(0.64f64.ln())).abs() < 1e-10);
        assert!((b.statistic - 43.513).abs() < 1e-3);
        // scipy.stats.chi2.sf(43.5129925062709, 1)
        assert!((b.p_value - 4.2115388792185e-11).abs() < 1e-10 * 4.2115388792185e-11 * 100.0);
    }

    #[test]
    fn bartlett_singular() {
        let r = two_by_two(1.0);
        assert!(matches!(bartlett_test(&r, 10), Err(Error::Singular(_))));
    }

    #[test]
    fn chi_square_tail_reference_values() {
        // scipy.stats.chi2.sf
        let cases = [
            (10.0, 3.0, 0.01856613546304325),
            (3.5, 7.0, 0.8352254826103422),
            (5100.0, 5000.0, 0.158639348619404),
            (4800.0, 5000.0, 0.9783403121346367),
            (990.0, 990.0, 0.4940228925407105),
        ];
        for (x, df, expected) in cases {
            let got = chi_square_sf(x, df);
            assert!(
                ((got - expected) / expected).abs() < 1e-10,
                "x={x} df={df}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn kmo_two_variables_is_half() {
        for r in [0.1, -0.3, 0.6, 0.95] {
            let k = kmo(&two_by_two(r)).unwrap();
            assert!((k.overall - 0.5).abs() < 1e-10, "r={r}: {}", k.overall);
        }
    }

    #[test]
    fn kmo_equicorrelated_three() {
        let k = kmo(&CorrelationMatrix::equicorrelated(3, 0.5).unwrap()).unwrap();
        assert!((k.overall - 0.75 / (0.75 + 1.0 / 3.0)).abs() < 1e-12);
        for v in &k.per_variable {
            assert!((v - k.overall).abs() < 1e-12);
        }
    }

    #[test]
    fn kmo_identity_undefined() {
        let r = CorrelationMatrix::equicorrelated(3, 0.0).unwrap();
        assert!(matches!(kmo(&r), Err(Error::UndefinedKmo)));
    }

    #[test]
    fn rejects_invalid_matrices() {
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.4, 1.0]);
        assert!(CorrelationMatrix::new(vec!["a".into(), "b".into()], bad).is_err());
    }
}
