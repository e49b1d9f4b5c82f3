//! Delimited-table and text emitters for every stage, plus readers for the
//! tables a later stage consumes on a partial rerun.
//!
//! Cluster ids are 1-based in every emitted table; the library uses
//! 0-based indices internally.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::adequacy::AdequacyResult;
use crate::clustering::{ClusterSolution, DissimilarityMatrix, KScanRow, Silhouette};
use crate::corpus::{DropReport, OccupationMatrix, SocCode};
use crate::error::{Error, Result};
use crate::factors::{FactorSolution, ParallelAnalysisResult};
use crate::trends::TrendReport;
use crate::vulnerability::VulnerabilityReport;

fn writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer cannot fail");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

fn row<I, S>(w: &mut csv::Writer<Vec<u8>>, fields: I)
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(fields).expect("in-memory writer cannot fail");
}

fn num(v: f64) -> String {
    if v.is_nan() {
        "NA".to_owned()
    } else {
        v.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_owned(), num)
}

pub fn drops_table(report: &DropReport) -> String {
    let mut w = writer();
    row(&mut w, ["soc_code", "missing_attribute_ids"]);
    for (code, missing) in &report.dropped {
        row(&mut w, [code.as_str(), &missing.join(";")]);
    }
    finish(w)
}

/// The assembled (unstandardized) matrix, one row per occupation.
pub fn matrix_table(matrix: &OccupationMatrix) -> String {
    let mut w = writer();
    let mut header = vec!["soc_code".to_owned()];
    header.extend(matrix.attribute_ids.iter().cloned());
    row(&mut w, &header);
    for (i, code) in matrix.occupation_ids.iter().enumerate() {
        let mut fields = vec![code.to_string()];
        fields.extend(matrix.values.row(i).iter().map(|&v| num(v)));
        row(&mut w, &fields);
    }
    finish(w)
}

pub fn adequacy_text(result: &AdequacyResult, n: usize, p: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "occupations: {n}");
    let _ = writeln!(s, "attributes: {p}");
    let _ = writeln!(s, "bartlett_statistic: {}", num(result.bartlett.statistic));
    let _ = writeln!(s, "bartlett_df: {}", result.bartlett.df);
    let _ = writeln!(s, "bartlett_p_value: {}", num(result.bartlett.p_value));
    let _ = writeln!(s, "kmo_overall: {}", num(result.kmo_overall));
    let _ = writeln!(s, "condition_number: {}", num(result.condition_number));
    for (id, v) in &result.kmo_per_variable {
        let _ = writeln!(s, "kmo[{id}]: {}", num(*v));
    }
    for w in &result.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    let _ = writeln!(
        s,
        "advisory: conventional guidance is KMO >= 0.6 and Bartlett p < 0.05; not enforced"
    );
    s
}

pub fn scree_table(pa: &ParallelAnalysisResult) -> String {
    let mut w = writer();
    row(&mut w, ["rank", "observed", "reference"]);
    for (i, (o, r)) in pa
        .observed_eigenvalues
        .iter()
        .zip(&pa.reference_eigenvalues)
        .enumerate()
    {
        row(&mut w, [(i + 1).to_string(), num(*o), num(*r)]);
    }
    finish(w)
}

pub fn loadings_table(attribute_ids: &[String], labels: &[String], solution: &FactorSolution) -> String {
    let mut w = writer();
    let mut header = vec!["attribute_id".to_owned()];
    header.extend(labels.iter().cloned());
    header.push("communality".to_owned());
    row(&mut w, &header);
    for (i, id) in attribute_ids.iter().enumerate() {
        let mut fields = vec![id.clone()];
        fields.extend(solution.loadings.row(i).iter().map(|&v| num(v)));
        fields.push(num(solution.communalities[i]));
        row(&mut w, &fields);
    }
    finish(w)
}

pub fn scores_table(ids: &[SocCode], labels: &[String], scores: &DMatrix<f64>) -> String {
    let mut w = writer();
    let mut header = vec!["soc_code".to_owned()];
    header.extend(labels.iter().cloned());
    row(&mut w, &header);
    for (i, id) in ids.iter().enumerate() {
        let mut fields = vec![id.to_string()];
        fields.extend(scores.row(i).iter().map(|&v| num(v)));
        row(&mut w, &fields);
    }
    finish(w)
}

pub fn kscan_table(rows: &[KScanRow]) -> String {
    let mut w = writer();
    row(&mut w, ["k", "mean_silhouette", "cost_z"]);
    for r in rows {
        row(&mut w, [r.k.to_string(), num(r.mean_silhouette), num(r.cost_z)]);
    }
    finish(w)
}

pub fn clusters_table(ids: &[SocCode], solution: &ClusterSolution, d: &DissimilarityMatrix) -> String {
    let mut w = writer();
    row(&mut w, ["soc_code", "cluster", "distance_to_medoid", "silhouette"]);
    for (i, id) in ids.iter().enumerate() {
        let c = solution.assignment[i];
        let s = solution.silhouette.as_ref().map(|s| s.values[i]);
        row(
            &mut w,
            [
                id.to_string(),
                (c + 1).to_string(),
                num(d.get(i, solution.medoids[c])),
                opt(s),
            ],
        );
    }
    finish(w)
}

pub fn medoids_table(ids: &[SocCode], solution: &ClusterSolution) -> String {
    let mut w = writer();
    row(&mut w, ["cluster", "medoid_soc_code"]);
    for (c, &m) in solution.medoids.iter().enumerate() {
        row(&mut w, [(c + 1).to_string(), ids[m].to_string()]);
    }
    finish(w)
}

pub fn vulnerability_table(report: &VulnerabilityReport) -> String {
    let mut w = writer();
    row(
        &mut w,
        ["soc_code", "cluster", "susceptibility_type", "criteria_satisfied", "vulnerable"],
    );
    for (i, id) in report.occupation_ids.iter().enumerate() {
        row(
            &mut w,
            [
                id.to_string(),
                (report.cluster[i] + 1).to_string(),
                report.susceptibility_type[i].clone(),
                report.criteria_satisfied(i).join(";"),
                report.is_vulnerable(i).to_string(),
            ],
        );
    }
    finish(w)
}

pub fn vulnerability_summary(report: &VulnerabilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "threshold_sd: {}", report.threshold_sd);
    for c in &report.criteria {
        let _ = writeln!(
            s,
            "criterion: {} (factor {}, {:?}, fraction {})",
            c.label,
            c.factor_index + 1,
            c.direction,
            c.fraction
        );
    }
    let clusters: Vec<String> = report
        .vulnerable_clusters
        .iter()
        .map(|c| (c + 1).to_string())
        .collect();
    let _ = writeln!(s, "vulnerable_clusters: {}", clusters.join(","));
    let _ = writeln!(s, "vulnerable_occupations: {}", report.vulnerable_occupations.len());
    let _ = writeln!(s, "occupations: {}", report.occupation_ids.len());
    for (c, size, vulnerable) in report.cluster_counts() {
        let _ = writeln!(s, "cluster[{}]: size={size} vulnerable={vulnerable}", c + 1);
    }
    for (t, count) in report.type_counts() {
        let _ = writeln!(s, "type[{t}]: {count}");
    }
    s
}

/// Two-column tab-separated list `Cluster<TAB>Occupations`, one row per
/// vulnerable occupation, grouped by cluster. `titles` replaces codes with
/// names where available.
pub fn vulnerable_list_table(report: &VulnerabilityReport, titles: &BTreeMap<SocCode, String>) -> String {
    let mut rows: Vec<(usize, String)> = Vec::new();
    for (i, id) in report.occupation_ids.iter().enumerate() {
        if report.is_vulnerable(i) {
            let name = titles
                .get(id)
                .or_else(|| titles.iter().find(|(k, _)| k.six_digit() == id.six_digit()).map(|(_, v)| v))
                .cloned()
                .unwrap_or_else(|| id.to_string());
            rows.push((report.cluster[i] + 1, name));
        }
    }
    rows.sort();
    let mut s = String::from("Cluster\tOccupations\n");
    for (c, name) in rows {
        let _ = writeln!(s, "{c}\t{name}");
    }
    s
}

/// Per-occupation growth for every group.
pub fn trends_table(report: &TrendReport) -> String {
    let mut w = writer();
    row(
        &mut w,
        ["group", "soc_code", "mean_annual_growth", "cagr", "start_employment", "end_employment"],
    );
    for (label, g) in &report.groups {
        for (code, o) in &g.per_occupation {
            row(
                &mut w,
                [
                    label.clone(),
                    code.to_string(),
                    num(o.mean_annual),
                    num(o.cagr),
                    num(o.start),
                    num(o.end),
                ],
            );
        }
    }
    finish(w)
}

pub fn trends_summary_table(report: &TrendReport) -> String {
    let mut w = writer();
    row(
        &mut w,
        [
            "group",
            "occupations",
            "excluded",
            "mean_annual_growth",
            "mean_cagr",
            "pooled_annual_growth",
            "pooled_cagr",
            "total_start",
            "total_end",
        ],
    );
    for (label, g) in &report.groups {
        row(
            &mut w,
            [
                label.clone(),
                g.count.to_string(),
                g.excluded.len().to_string(),
                num(g.mean_annual_growth),
                num(g.mean_cagr),
                num(g.pooled_annual_growth),
                num(g.pooled_cagr),
                num(g.total_start),
                num(g.total_end),
            ],
        );
    }
    finish(w)
}

pub fn trends_text(report: &TrendReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "years: {}-{}", report.year_range.start, report.year_range.end);
    let _ = writeln!(s, "metric: unweighted mean of per-occupation mean simple annual change");
    let _ = match report.ratio_vulnerable_to_nonvulnerable {
        Some(r) => writeln!(s, "ratio_vulnerable_to_non_vulnerable: {r}"),
        None => writeln!(s, "ratio_vulnerable_to_non_vulnerable: undefined (non-positive denominator)"),
    };
    for (label, g) in &report.groups {
        let _ = writeln!(
            s,
            "group[{label}]: occupations={} mean_annual_growth={} mean_cagr={} pooled_annual_growth={} pooled_cagr={} whole_period_change={}",
            g.count,
            num(g.mean_annual_growth),
            num(g.mean_cagr),
            num(g.pooled_annual_growth),
            num(g.pooled_cagr),
            num(g.total_end / g.total_start - 1.0),
        );
        for (code, reason) in &g.excluded {
            let _ = writeln!(s, "excluded[{label}]: {code} ({reason})");
        }
    }
    s
}

// ---- readers ---------------------------------------------------------------

struct Parsed {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

fn parse(text: &str, name: &str, expect: &[&str]) -> Result<Parsed> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Format(format!("{name}: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.len() < expect.len() || header.iter().zip(expect).any(|(h, e)| h != e) {
        return Err(Error::Format(format!(
            "{name}: header must start with {}",
            expect.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(format!("{name}: {e}")))?;
        rows.push((i + 2, rec.iter().map(str::to_owned).collect()));
    }
    Ok(Parsed { header, rows })
}

fn field_f64(name: &str, line: usize, raw: &str) -> Result<f64> {
    if raw == "NA" {
        return Ok(f64::NAN);
    }
    raw.parse().map_err(|_| Error::Validation {
        line,
        message: format!("{name}: `{raw}` is not a number"),
    })
}

fn field_usize(name: &str, line: usize, raw: &str) -> Result<usize> {
    raw.parse().map_err(|_| Error::Validation {
        line,
        message: format!("{name}: `{raw}` is not a non-negative integer"),
    })
}

fn field_soc(name: &str, line: usize, raw: &str) -> Result<SocCode> {
    SocCode::parse(raw).map_err(|e| Error::Validation {
        line,
        message: format!("{name}: {e}"),
    })
}

/// Occupation ids, factor labels and the n×m score matrix.
pub fn read_scores_table(text: &str) -> Result<(Vec<SocCode>, Vec<String>, DMatrix<f64>)> {
    let name = "scores.csv";
    let t = parse(text, name, &["soc_code"])?;
    let labels: Vec<String> = t.header[1..].to_vec();
    if labels.is_empty() || t.rows.is_empty() {
        return Err(Error::Format(format!("{name}: no scores")));
    }
    let m = labels.len();
    let mut ids = Vec::with_capacity(t.rows.len());
    let mut values = Vec::with_capacity(t.rows.len() * m);
    for (line, fields) in &t.rows {
        ids.push(field_soc(name, *line, &fields[0])?);
        for raw in &fields[1..] {
            values.push(field_f64(name, *line, raw)?);
        }
    }
    Ok((ids, labels, DMatrix::from_row_slice(t.rows.len(), m, &values)))
}

/// Rows of `rank, observed, reference`.
pub fn read_scree_table(text: &str) -> Result<Vec<Vec<f64>>> {
    read_numeric(text, "scree.csv", &["rank", "observed", "reference"])
}

/// Rows of `k, mean_silhouette, cost_z`.
pub fn read_kscan_table(text: &str) -> Result<Vec<Vec<f64>>> {
    read_numeric(text, "kscan.csv", &["k", "mean_silhouette", "cost_z"])
}

fn read_numeric(text: &str, name: &str, expect: &[&str]) -> Result<Vec<Vec<f64>>> {
    let t = parse(text, name, expect)?;
    t.rows
        .iter()
        .map(|(line, fields)| {
            fields[..expect.len()]
                .iter()
                .map(|raw| field_f64(name, *line, raw))
                .collect()
        })
        .collect()
}

/// Rebuilds a cluster solution over `ids` (row order of the scores) from the
/// cluster and medoid tables. Cost is recomputed from `d`.
pub fn read_cluster_tables(
    clusters_text: &str,
    medoids_text: &str,
    ids: &[SocCode],
    d: &DissimilarityMatrix,
) -> Result<ClusterSolution> {
    let index: BTreeMap<&SocCode, usize> = ids.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let lookup = |name: &str, line: usize, code: &SocCode| {
        index.get(code).copied().ok_or_else(|| Error::Validation {
            line,
            message: format!("{name}: {code} is not among the scored occupations"),
        })
    };

    let m = parse(medoids_text, "medoids.csv", &["cluster", "medoid_soc_code"])?;
    let k = m.rows.len();
    let mut medoids = vec![usize::MAX; k];
    for (line, fields) in &m.rows {
        let c = field_usize("medoids.csv", *line, &fields[0])?;
        if c == 0 || c > k || medoids[c - 1] != usize::MAX {
            return Err(Error::Validation {
                line: *line,
                message: format!("medoids.csv: cluster {c} invalid or repeated"),
            });
        }
        let code = field_soc("medoids.csv", *line, &fields[1])?;
        medoids[c - 1] = lookup("medoids.csv", *line, &code)?;
    }

    let t = parse(clusters_text, "clusters.csv", &["soc_code", "cluster", "distance_to_medoid", "silhouette"])?;
    let mut assignment = vec![usize::MAX; ids.len()];
    let mut sil = vec![f64::NAN; ids.len()];
    for (line, fields) in &t.rows {
        let code = field_soc("clusters.csv", *line, &fields[0])?;
        let i = lookup("clusters.csv", *line, &code)?;
        let c = field_usize("clusters.csv", *line, &fields[1])?;
        if c == 0 || c > k {
            return Err(Error::Validation {
                line: *line,
                message: format!("clusters.csv: cluster {c} outside 1..={k}"),
            });
        }
        assignment[i] = c - 1;
        sil[i] = field_f64("clusters.csv", *line, &fields[3])?;
    }
    if let Some(i) = assignment.iter().position(|&a| a == usize::MAX) {
        return Err(Error::Format(format!("clusters.csv: no row for {}", ids[i])));
    }
    let cost_z = (0..ids.len()).map(|i| d.get(i, medoids[assignment[i]])).sum();
    let silhouette = (!sil.iter().any(|v| v.is_nan())).then(|| Silhouette {
        mean: sil.iter().sum::<f64>() / sil.len() as f64,
        values: sil,
    });
    Ok(ClusterSolution {
        k,
        medoids,
        assignment,
        cost_z,
        silhouette,
        cost_trace: vec![cost_z],
    })
}

/// `(vulnerable, non_vulnerable)` codes, each sorted.
pub fn read_vulnerability_table(text: &str) -> Result<(Vec<SocCode>, Vec<SocCode>)> {
    let name = "vulnerability.csv";
    let t = parse(
        text,
        name,
        &["soc_code", "cluster", "susceptibility_type", "criteria_satisfied", "vulnerable"],
    )?;
    let mut yes = Vec::new();
    let mut no = Vec::new();
    for (line, fields) in &t.rows {
        let code = field_soc(name, *line, &fields[0])?;
        match fields[4].as_str() {
            "true" => yes.push(code),
            "false" => no.push(code),
            other => {
                return Err(Error::Validation {
                    line: *line,
                    message: format!("{name}: vulnerable must be true or false, got `{other}`"),
                })
            }
        }
    }
    yes.sort();
    no.sort();
    Ok((yes, no))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{dissimilarity_matrix, pam, silhouette, Metric, PamInit};

    fn soc(i: usize) -> SocCode {
        SocCode::parse(&format!("11-{:04}", 1000 + i)).unwrap()
    }

    #[test]
    fn scores_roundtrip() {
        let ids: Vec<SocCode> = (0..3).map(soc).collect();
        let labels = vec!["hazard".to_owned(), "negotiation".to_owned()];
        let scores = DMatrix::from_row_slice(3, 2, &[0.1, -1.5, 2.0 / 3.0, 1e-17, -0.25, 7.0]);
        let text = scores_table(&ids, &labels, &scores);
        let (ids2, labels2, scores2) = read_scores_table(&text).unwrap();
        assert_eq!(ids2, ids);
        assert_eq!(labels2, labels);
        assert_eq!(scores2, scores);
    }

    #[test]
    fn cluster_roundtrip() {
        let pts = DMatrix::from_column_slice(6, 1, &[1.0, 2.0, 3.0, 10.0, 11.0, 12.0]);
        let ids: Vec<SocCode> = (0..6).map(soc).collect();
        let d = dissimilarity_matrix(&pts, ids.iter().map(|c| c.to_string()).collect(), Metric::Euclidean)
            .unwrap();
        let mut s = pam(&d, 2, PamInit::Build).unwrap();
        s.silhouette = Some(silhouette(&d, &s.assignment).unwrap());
        let back = read_cluster_tables(&clusters_table(&ids, &s, &d), &medoids_table(&ids, &s), &ids, &d)
            .unwrap();
        assert_eq!(back.medoids, s.medoids);
        assert_eq!(back.assignment, s.assignment);
        assert_eq!(back.cost_z, s.cost_z);
        assert_eq!(back.silhouette.unwrap().values, s.silhouette.unwrap().values);
    }

    #[test]
    fn bad_header_is_format_error() {
        assert!(matches!(read_kscan_table("a,b,c\n1,2,3\n"), Err(Error::Format(_))));
        assert!(matches!(
            read_scree_table("rank,observed,reference\n1,x,2\n"),
            Err(Error::Validation { line: 2, .. })
        ));
    }
}
