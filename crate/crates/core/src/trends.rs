//! Employment growth comparison between vulnerable and non-vulnerable
//! occupations.
//!
//! The headline metric is the unweighted mean, across occupations, of each
//! occupation's mean simple annual change `(E[t+1] − E[t]) / E[t]`. The
//! compound annual rate and the growth of pooled (summed) headcounts are
//! reported alongside, since "average growth" admits all three readings.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{EmploymentSeries, SocCode};
use crate::error::{Error, Result};
use crate::vulnerability::VulnerabilityReport;

pub const VULNERABLE: &str = "vulnerable";
pub const NON_VULNERABLE: &str = "non_vulnerable";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if end <= start {
            return Err(Error::Parameter(format!(
                "year range needs end > start (got {start}..{end})"
            )));
        }
        Ok(YearRange { start, end })
    }

    pub fn years(self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }

    pub fn steps(self) -> usize {
        (self.end - self.start) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OccupationGrowth {
    /// Mean of simple annual changes.
    pub mean_annual: f64,
    /// Compound annual growth rate between the range endpoints.
    pub cagr: f64,
    pub start: f64,
    pub end: f64,
}

/// Growth of one series over `range`, or the reason it cannot be measured.
pub fn occupation_growth(
    years: &BTreeMap<i32, f64>,
    range: YearRange,
) -> std::result::Result<OccupationGrowth, String> {
    let mut values = Vec::with_capacity(range.steps() + 1);
    for y in range.years() {
        match years.get(&y) {
            Some(&v) => values.push(v),
            None => return Err(format!("no headcount for {y}")),
        }
    }
    let mut sum = 0.0;
    for (i, w) in values.windows(2).enumerate() {
        if w[0] == 0.0 {
            return Err(format!(
                "zero headcount in {} (division by zero)",
                range.start + i as i32
            ));
        }
        sum += (w[1] - w[0]) / w[0];
    }
    let steps = range.steps() as f64;
    let start = values[0];
    let end = values[values.len() - 1];
    Ok(OccupationGrowth {
        mean_annual: sum / steps,
        cagr: (end / start).powf(1.0 / steps) - 1.0,
        start,
        end,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupGrowth {
    /// Unweighted mean over occupations of their mean annual change.
    pub mean_annual_growth: f64,
    /// Unweighted mean over occupations of their CAGR.
    pub mean_cagr: f64,
    /// Mean annual change of the summed headcounts.
    pub pooled_annual_growth: f64,
    /// CAGR of the summed headcounts.
    pub pooled_cagr: f64,
    pub total_start: f64,
    pub total_end: f64,
    pub count: usize,
    pub per_occupation: Vec<(SocCode, OccupationGrowth)>,
    /// Codes left out, with the reason.
    pub excluded: Vec<(SocCode, String)>,
}

/// Growth statistics for `group`. Codes without full, non-zero coverage of
/// `range` are excluded and listed.
pub fn growth_stats(
    series: &EmploymentSeries,
    group: &[SocCode],
    range: YearRange,
    label: &str,
) -> Result<GroupGrowth> {
    let mut per_occupation = Vec::new();
    let mut excluded = Vec::new();
    let mut pooled = vec![0.0; range.steps() + 1];
    for code in group {
        let Some(years) = series.lookup(code) else {
            excluded.push((code.clone(), "no employment series".to_owned()));
            continue;
        };
        match occupation_growth(years, range) {
            Ok(g) => {
                for (slot, y) in pooled.iter_mut().zip(range.years()) {
                    *slot += years[&y];
                }
                per_occupation.push((code.clone(), g));
            }
            Err(reason) => excluded.push((code.clone(), reason)),
        }
    }
    if per_occupation.is_empty() {
        return Err(Error::EmptyGroup {
            group: label.to_owned(),
            unmatched: excluded.iter().map(|(c, _)| c.to_string()).collect(),
        });
    }
    let count = per_occupation.len();
    let mean = |f: fn(&OccupationGrowth) -> f64| {
        per_occupation.iter().map(|(_, g)| f(g)).sum::<f64>() / count as f64
    };
    let mean_annual_growth = mean(|g| g.mean_annual);
    let mean_cagr = mean(|g| g.cagr);

    let mut pooled_map = BTreeMap::new();
    for (y, v) in range.years().zip(&pooled) {
        pooled_map.insert(y, *v);
    }
    let (pooled_annual_growth, pooled_cagr) = match occupation_growth(&pooled_map, range) {
        Ok(g) => (g.mean_annual, g.cagr),
        Err(_) => (f64::NAN, f64::NAN),
    };
    Ok(GroupGrowth {
        mean_annual_growth,
        mean_cagr,
        pooled_annual_growth,
        pooled_cagr,
        total_start: pooled[0],
        total_end: pooled[pooled.len() - 1],
        count,
        per_occupation,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendReport {
    pub year_range: YearRange,
    /// `vulnerable`, `non_vulnerable`, then configured sub-groups in order.
    pub groups: Vec<(String, GroupGrowth)>,
    /// Vulnerable mean ÷ non-vulnerable mean; `None` when the denominator is
    /// not positive.
    pub ratio_vulnerable_to_nonvulnerable: Option<f64>,
    /// Mean annual growth of every matched occupation in the two main groups.
    pub per_occupation_growth: BTreeMap<SocCode, f64>,
}

impl TrendReport {
    pub fn group(&self, label: &str) -> Option<&GroupGrowth> {
        self.groups.iter().find(|(l, _)| l == label).map(|(_, g)| g)
    }
}

/// Ratio of group means, undefined for a non-positive denominator.
pub fn growth_ratio(vulnerable: f64, non_vulnerable: f64) -> Option<f64> {
    (non_vulnerable > 0.0).then(|| vulnerable / non_vulnerable)
}

/// Compares vulnerable against non-vulnerable occupations, plus any named
/// sub-groups.
pub fn compare_groups(
    series: &EmploymentSeries,
    report: &VulnerabilityReport,
    range: YearRange,
    subgroups: &[(String, Vec<SocCode>)],
) -> Result<TrendReport> {
    compare_sets(
        series,
        &report.vulnerable_occupations,
        &report.non_vulnerable_occupations(),
        range,
        subgroups,
    )
}

/// [`compare_groups`] on explicit code lists.
pub fn compare_sets(
    series: &EmploymentSeries,
    vulnerable: &[SocCode],
    non_vulnerable: &[SocCode],
    range: YearRange,
    subgroups: &[(String, Vec<SocCode>)],
) -> Result<TrendReport> {
    let vulnerable = growth_stats(series, vulnerable, range, VULNERABLE)?;
    let non_vulnerable = growth_stats(series, non_vulnerable, range, NON_VULNERABLE)?;
    let ratio = growth_ratio(
        vulnerable.mean_annual_growth,
        non_vulnerable.mean_annual_growth,
    );
    let per_occupation_growth = vulnerable
        .per_occupation
        .iter()
        .chain(&non_vulnerable.per_occupation)
        .map(|(c, g)| (c.clone(), g.mean_annual))
        .collect();
    let mut groups = vec![
        (VULNERABLE.to_owned(), vulnerable),
        (NON_VULNERABLE.to_owned(), non_vulnerable),
    ];
    for (label, codes) in subgroups {
        groups.push((label.clone(), growth_stats(series, codes, range, label)?));
    }
    Ok(TrendReport {
        year_range: range,
        groups,
        ratio_vulnerable_to_nonvulnerable: ratio,
        per_occupation_growth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc(s: &str) -> SocCode {
        SocCode::parse(s).unwrap()
    }

    fn series(rows: &[(&str, &[f64])], start: i32) -> EmploymentSeries {
        let mut s = EmploymentSeries::new();
        for (code, values) in rows {
            for (i, v) in values.iter().enumerate() {
                s.insert(soc(code), start + i as i32, *v).unwrap();
            }
        }
        s
    }

    #[test]
    fn one_percent() {
        let s = series(&[("11-1011", &[100.0, 101.0])], 2010);
        let g = growth_stats(&s, &[soc("11-1011")], YearRange::new(2010, 2011).unwrap(), "g")
            .unwrap();
        assert!((g.mean_annual_growth - 0.01).abs() < 1e-15);
        assert!((g.mean_cagr - 0.01).abs() < 1e-12);
    }

    #[test]
    fn constant_series() {
        let s = series(&[("11-1011", &[50.0; 5])], 2010);
        let g = growth_stats(&s, &[soc("11-1011")], YearRange::new(2010, 2014).unwrap(), "g")
            .unwrap();
        assert_eq!(g.mean_annual_growth, 0.0);
        assert_eq!(g.pooled_cagr, 0.0);
    }

    #[test]
    fn exclusions_are_listed() {
        let s = series(
            &[
                ("11-1011", &[100.0, 110.0, 121.0]),
                ("11-1021", &[0.0, 5.0, 6.0]),
                ("11-2011", &[10.0, 11.0]),
            ],
            2010,
        );
        let group = [soc("11-1011.00"), soc("11-1021"), soc("11-2011"), soc("13-1011")];
        let g = growth_stats(&s, &group, YearRange::new(2010, 2012).unwrap(), "g").unwrap();
        assert_eq!(g.count, 1);
        assert_eq!(g.excluded.len(), 3);
        assert!((g.mean_annual_growth - 0.1).abs() < 1e-12);
    }

    #[test]
    fn empty_group() {
        let s = series(&[("11-1011", &[100.0, 101.0])], 2010);
        let err = growth_stats(&s, &[soc("13-1011")], YearRange::new(2010, 2011).unwrap(), "v")
            .unwrap_err();
        match err {
            Error::EmptyGroup { group, unmatched } => {
                assert_eq!(group, "v");
                assert_eq!(unmatched, vec!["13-1011"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ratio_rules() {
        assert_eq!(growth_ratio(0.01, 0.02), Some(0.5));
        assert_eq!(growth_ratio(0.01, 0.0), None);
        assert_eq!(growth_ratio(0.01, -0.01), None);
        assert_eq!(growth_ratio(0.02, 0.02), Some(1.0));
    }

    #[test]
    fn year_range_validation() {
        assert!(YearRange::new(2018, 2010).is_err());
        assert_eq!(YearRange::new(2010, 2018).unwrap().years().count(), 9);
    }
}
