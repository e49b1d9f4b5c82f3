//! Stage orchestration, output bundle and run manifest.
//!
//! Stages run in a fixed order and stop at the first error. Every stage that
//! was entered appears in the manifest, including stages whose results were
//! read back from tables already in the output directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::adequacy::{assess, correlation};
use crate::clustering::{dissimilarity_matrix, pam, select_k, ClusterSolution, DissimilarityMatrix};
use crate::config::{InputFile, PipelineConfig};
use crate::corpus::{
    build_matrix, parse_attribute_file, parse_catalog_file, parse_employment_file,
    parse_titles_file, standardize, AttributeCatalog, DropReport, EmploymentSeries,
    OccupationMatrix, SocCode,
};
use crate::error::{Error, Result};
use crate::factors::{extract_paf, factor_scores, fit_indices, parallel_analysis, rotate};
use crate::plot::{render, PlotKind};
use crate::report;
use crate::trends::compare_sets;
use crate::vulnerability::{label_clusters, score_criteria, vulnerable_list};

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Ingest,
    Adequacy,
    Factors,
    Cluster,
    Classify,
    Trends,
    Plot,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Adequacy => "adequacy",
            Stage::Factors => "factors",
            Stage::Cluster => "cluster",
            Stage::Classify => "classify",
            Stage::Trends => "trends",
            Stage::Plot => "plot",
        }
    }
}

/// What to run: a single stage (reusing earlier tables where present) or
/// the whole pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Stage(Stage),
    Run,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Stage(s) => s.name(),
            Command::Run => "run",
        }
    }

    /// `manifest.json` for a full run, `manifest-<stage>.json` otherwise, so
    /// partial reruns never overwrite the bundle manifest.
    pub fn manifest_file(self) -> String {
        match self {
            Command::Run => MANIFEST_FILE.to_owned(),
            Command::Stage(s) => format!("manifest-{}.json", s.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StageStatus {
    Completed,
    /// Results read from tables of an earlier run.
    Reused,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: StageStatus,
    pub elapsed_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub occupations: Option<usize>,
    pub attributes: Option<usize>,
    pub dropped: Option<usize>,
    pub suggested_factors: Option<usize>,
    pub factors: Option<usize>,
    pub k: Option<usize>,
    /// 1-based, as in the emitted tables.
    pub vulnerable_clusters: Option<Vec<usize>>,
    pub vulnerable_occupations: Option<usize>,
    pub growth_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    pub command: String,
    /// False when a stage failed; outputs listed are then partial.
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub stages: Vec<StageRecord>,
    pub warnings: Vec<String>,
    pub summary: RunSummary,
    /// File name → sha256 of every file written by this run.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    /// Copy with stage timings zeroed, for run-to-run comparison.
    pub fn without_timings(&self) -> Self {
        let mut m = self.clone();
        for s in &mut m.stages {
            s.elapsed_ms = 0;
        }
        m
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Output of the ingest stage.
#[derive(Debug, Clone)]
pub struct Ingested {
    pub matrix: OccupationMatrix,
    pub standardized: OccupationMatrix,
    pub drops: DropReport,
}

/// Factor scores, from the factors stage or `scores.csv`.
#[derive(Debug, Clone)]
pub struct Scores {
    pub ids: Vec<SocCode>,
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
}

struct Clustered {
    solution: ClusterSolution,
}

/// Runs the full pipeline into the configured output directory.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest> {
    run_command(config, Command::Run, &config.output_dir())
}

/// Runs `command` into `out`.
pub fn run_command(config: &PipelineConfig, command: Command, out: &Path) -> Result<RunManifest> {
    let mut p = Pipeline::new(config, out, command);
    let result = p.execute(command);
    p.finish(result, &command.manifest_file())
}

struct Pipeline<'a> {
    config: &'a PipelineConfig,
    out: PathBuf,
    out_created: bool,
    manifest: RunManifest,
    employment: Option<EmploymentSeries>,
    titles: Option<BTreeMap<SocCode, String>>,
}

impl<'a> Pipeline<'a> {
    fn new(config: &'a PipelineConfig, out: &Path, command: Command) -> Self {
        Pipeline {
            config,
            out: out.to_path_buf(),
            out_created: false,
            manifest: RunManifest {
                manifest_version: MANIFEST_VERSION,
                tool: "taskrisk".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                command: command.name().into(),
                complete: false,
                error: None,
                config: serde_json::to_value(config).expect("config serializes"),
                inputs: Vec::new(),
                stages: Vec::new(),
                warnings: Vec::new(),
                summary: RunSummary::default(),
                outputs: BTreeMap::new(),
            },
            employment: None,
            titles: None,
        }
    }

    fn execute(&mut self, command: Command) -> Result<()> {
        match command {
            Command::Run => {
                let ing = self.stage(Stage::Ingest, |p| p.ingest(true))?;
                self.stage(Stage::Adequacy, |p| p.adequacy(&ing))?;
                let scores = self.stage(Stage::Factors, |p| p.factors(&ing))?;
                let clustered = self.stage(Stage::Cluster, |p| p.cluster(&scores))?;
                let (v, nv) = self.stage(Stage::Classify, |p| p.classify(&scores, &clustered.solution))?;
                self.stage(Stage::Trends, |p| p.trends(&v, &nv))?;
                self.stage(Stage::Plot, |p| p.plot())
            }
            Command::Stage(Stage::Ingest) => self.stage(Stage::Ingest, |p| p.ingest(false)).map(drop),
            Command::Stage(Stage::Adequacy) => {
                let ing = self.stage(Stage::Ingest, |p| p.ingest(false))?;
                self.stage(Stage::Adequacy, |p| p.adequacy(&ing))
            }
            Command::Stage(Stage::Factors) => {
                let ing = self.stage(Stage::Ingest, |p| p.ingest(false))?;
                self.stage(Stage::Factors, |p| p.factors(&ing)).map(drop)
            }
            Command::Stage(Stage::Cluster) => {
                let scores = self.scores()?;
                self.stage(Stage::Cluster, |p| p.cluster(&scores)).map(drop)
            }
            Command::Stage(Stage::Classify) => {
                let scores = self.scores()?;
                let solution = self.cluster_solution(&scores)?;
                self.stage(Stage::Classify, |p| p.classify(&scores, &solution)).map(drop)
            }
            Command::Stage(Stage::Trends) => {
                let (v, nv) = self.vulnerability_sets()?;
                self.stage(Stage::Trends, |p| p.trends(&v, &nv))
            }
            Command::Stage(Stage::Plot) => self.stage(Stage::Plot, |p| p.plot()),
        }
    }

    fn stage<T>(&mut self, stage: Stage, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let result = f(self);
        let status = if result.is_ok() {
            StageStatus::Completed
        } else {
            StageStatus::Failed
        };
        self.manifest.stages.push(StageRecord {
            stage,
            status,
            elapsed_ms: start.elapsed().as_millis() as u64,
            detail: None,
        });
        result.map_err(|e| e.in_stage(stage.name()))
    }

    fn reused(&mut self, stage: Stage, tables: &[&str]) {
        self.manifest.stages.push(StageRecord {
            stage,
            status: StageStatus::Reused,
            elapsed_ms: 0,
            detail: Some(format!("read {}", tables.join(", "))),
        });
    }

    fn finish(mut self, result: Result<()>, manifest_file: &str) -> Result<RunManifest> {
        match &result {
            Ok(()) => self.manifest.complete = true,
            Err(e) => self.manifest.error = Some(e.to_string()),
        }
        if self.out_created {
            let text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes") + "\n";
            let path = self.out.join(manifest_file);
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        }
        result.map(|()| self.manifest)
    }

    // ---- file helpers -----------------------------------------------------

    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        if !self.out_created {
            std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
            self.out_created = true;
        }
        let path = self.out.join(name);
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.manifest.outputs.insert(name.to_owned(), sha256_hex(text.as_bytes()));
        Ok(())
    }

    fn read_input(&mut self, role: &str, file: &InputFile) -> Result<Vec<u8>> {
        let path = self.config.resolve(file.path());
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        self.manifest.inputs.push(InputDigest {
            role: role.to_owned(),
            path: file.path().display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    /// Contents of an earlier output, if present.
    fn existing(&mut self, name: &str) -> Result<Option<String>> {
        let path = self.out.join(name);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        self.manifest.inputs.push(InputDigest {
            role: "table".into(),
            path: name.to_owned(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(Some(text))
    }

    fn required(&mut self, name: &str) -> Result<String> {
        let path = self.out.join(name);
        self.existing(name)?.ok_or_else(|| {
            Error::io(path, std::io::Error::new(std::io::ErrorKind::NotFound, "table not found; run the producing stage first"))
        })
    }

    fn load_employment(&mut self) -> Result<()> {
        if self.employment.is_none() {
            let file = self.config.inputs.employment.clone();
            let bytes = self.read_input("employment", &file)?;
            self.employment = Some(
                parse_employment_file(bytes.as_slice(), file.delimiter())
                    .map_err(|e| with_path(e, file.path()))?,
            );
        }
        Ok(())
    }

    fn load_titles(&mut self) -> Result<()> {
        if self.titles.is_none() {
            self.titles = Some(match self.config.inputs.titles.clone() {
                Some(file) => {
                    let bytes = self.read_input("titles", &file)?;
                    parse_titles_file(bytes.as_slice(), file.delimiter())
                        .map_err(|e| with_path(e, file.path()))?
                }
                None => BTreeMap::new(),
            });
        }
        Ok(())
    }

    // ---- upstream results for partial reruns ------------------------------

    fn scores(&mut self) -> Result<Scores> {
        if let Some(text) = self.existing("scores.csv")? {
            self.reused(Stage::Factors, &["scores.csv"]);
            let (ids, labels, values) =
                report::read_scores_table(&text).map_err(|e| e.in_stage(Stage::Factors.name()))?;
            return Ok(Scores { ids, labels, values });
        }
        let ing = self.stage(Stage::Ingest, |p| p.ingest(false))?;
        self.stage(Stage::Factors, |p| p.factors(&ing))
    }

    fn cluster_solution(&mut self, scores: &Scores) -> Result<ClusterSolution> {
        let clusters = self.existing("clusters.csv")?;
        let medoids = self.existing("medoids.csv")?;
        if let (Some(c), Some(m)) = (clusters, medoids) {
            self.reused(Stage::Cluster, &["clusters.csv", "medoids.csv"]);
            let d = self.dissimilarity(scores).map_err(|e| e.in_stage(Stage::Cluster.name()))?;
            return report::read_cluster_tables(&c, &m, &scores.ids, &d)
                .map_err(|e| e.in_stage(Stage::Cluster.name()));
        }
        Ok(self.stage(Stage::Cluster, |p| p.cluster(scores))?.solution)
    }

    fn vulnerability_sets(&mut self) -> Result<(Vec<SocCode>, Vec<SocCode>)> {
        if let Some(text) = self.existing("vulnerability.csv")? {
            self.reused(Stage::Classify, &["vulnerability.csv"]);
            return report::read_vulnerability_table(&text).map_err(|e| e.in_stage(Stage::Classify.name()));
        }
        let scores = self.scores()?;
        let solution = self.cluster_solution(&scores)?;
        self.stage(Stage::Classify, |p| p.classify(&scores, &solution))
    }

    // ---- stages -----------------------------------------------------------

    fn ingest(&mut self, with_downstream_inputs: bool) -> Result<Ingested> {
        let inputs = self.config.inputs.clone();
        let mut observations = Vec::new();
        let mut raw = Vec::new();
        for (i, file) in inputs.attributes.iter().enumerate() {
            raw.push((file.clone(), self.read_input(&format!("attributes[{i}]"), file)?));
        }
        let catalog = match &inputs.catalog {
            Some(file) => {
                let bytes = self.read_input("catalog", file)?;
                parse_catalog_file(bytes.as_slice(), file.delimiter()).map_err(|e| with_path(e, file.path()))?
            }
            None => AttributeCatalog::reconstructed_default(),
        };
        if with_downstream_inputs {
            self.load_employment()?;
            self.load_titles()?;
        }
        for (file, bytes) in raw {
            observations.extend(
                parse_attribute_file(bytes.as_slice(), file.delimiter()).map_err(|e| with_path(e, file.path()))?,
            );
        }
        let (matrix, drops) = build_matrix(&observations, &catalog)?;
        let standardized = if self.config.standardize {
            standardize(&matrix)?
        } else {
            check_standardized(&matrix)?
        };
        if !drops.is_empty() {
            self.manifest.warnings.push(format!(
                "{} occupation(s) dropped for missing attributes (see drops.csv)",
                drops.len()
            ));
        }
        let s = &mut self.manifest.summary;
        s.occupations = Some(matrix.n_occupations());
        s.attributes = Some(matrix.n_attributes());
        s.dropped = Some(drops.len());
        self.write("drops.csv", &report::drops_table(&drops))?;
        self.write("matrix.csv", &report::matrix_table(&matrix))?;
        Ok(Ingested {
            matrix,
            standardized,
            drops,
        })
    }

    fn adequacy(&mut self, ing: &Ingested) -> Result<()> {
        let z = &ing.standardized;
        let r = correlation(z)?;
        let result = assess(&r, z.n_occupations())?;
        self.manifest.warnings.extend(result.warnings.iter().map(|w| format!("adequacy: {w}")));
        let text = report::adequacy_text(&result, z.n_occupations(), z.n_attributes());
        self.write("adequacy.txt", &text)
    }

    fn factors(&mut self, ing: &Ingested) -> Result<Scores> {
        let z = &ing.standardized;
        let n = z.n_occupations();
        let r = correlation(z)?;
        let pa = parallel_analysis(z, self.config.parallel_analysis_options())?;
        self.write("scree.csv", &report::scree_table(&pa))?;
        self.manifest.summary.suggested_factors = Some(pa.suggested_factors);
        let m = match self.config.factors.count.fixed() {
            Some(m) => m,
            None if pa.suggested_factors == 0 => {
                return Err(Error::Parameter(
                    "parallel analysis retained no factors; set factors.count explicitly".into(),
                ))
            }
            None => pa.suggested_factors,
        };
        let mut solution = extract_paf(&r, m, self.config.paf_options())?;
        match fit_indices(&r, &solution.loadings, n) {
            Ok(fit) => solution.fit = Some(fit),
            Err(e) => solution.warnings.push(format!("fit indices unavailable: {e}")),
        }
        if self.config.factors.rotate {
            rotate(&mut solution, self.config.varimax_options())?;
        }
        let labels = self.config.labels_for(m);
        solution.scores = factor_scores(z, &r, &solution.loadings)?;
        solution.factor_labels = Some(labels.clone());
        self.manifest.warnings.extend(solution.warnings.iter().map(|w| format!("factors: {w}")));
        self.manifest.summary.factors = Some(m);

        self.write("loadings.csv", &report::loadings_table(&z.attribute_ids, &labels, &solution))?;
        self.write("factors.txt", &factor_summary(&solution, &labels))?;
        self.write("scores.csv", &report::scores_table(&z.occupation_ids, &labels, &solution.scores))?;
        Ok(Scores {
            ids: z.occupation_ids.clone(),
            labels,
            values: solution.scores,
        })
    }

    fn dissimilarity(&self, scores: &Scores) -> Result<DissimilarityMatrix> {
        dissimilarity_matrix(
            &scores.values,
            scores.ids.iter().map(|c| c.to_string()).collect(),
            self.config.clustering.metric,
        )
    }

    fn cluster(&mut self, scores: &Scores) -> Result<Clustered> {
        let d = self.dissimilarity(scores)?;
        let n = d.len();
        let c = &self.config.clustering;
        let k_max = c.k_max.min(n - 1);
        if k_max < c.k_max {
            self.manifest
                .warnings
                .push(format!("cluster: k_max lowered from {} to {k_max} (n = {n})", c.k_max));
        }
        let init = self.config.pam_init();
        let scan = select_k(&d, c.k_min, k_max, init)?;
        let solution = match c.k.fixed() {
            Some(k) if k == scan.best_k => scan.best,
            Some(k) => pam(&d, k, init)?,
            None => scan.best,
        };
        let ties = scan
            .table
            .iter()
            .filter(|r| r.k != solution.k && r.mean_silhouette == scan.table.iter().find(|t| t.k == scan.best_k).map_or(f64::NAN, |t| t.mean_silhouette))
            .count();
        if ties > 0 {
            self.manifest
                .warnings
                .push(format!("cluster: {ties} other k tie the best mean silhouette; smallest k kept"));
        }
        self.manifest.summary.k = Some(solution.k);
        self.write("kscan.csv", &report::kscan_table(&scan.table))?;
        self.write("clusters.csv", &report::clusters_table(&scores.ids, &solution, &d))?;
        self.write("medoids.csv", &report::medoids_table(&scores.ids, &solution))?;
        Ok(Clustered { solution })
    }

    fn classify(&mut self, scores: &Scores, solution: &ClusterSolution) -> Result<(Vec<SocCode>, Vec<SocCode>)> {
        let criteria = self.config.criteria_for(&scores.labels)?;
        let labeling = self.config.labeling_for(&scores.labels)?;
        let susceptibility = score_criteria(&scores.values, &criteria)?;
        let clusters = label_clusters(solution, &scores.values, &labeling)?;
        let report = vulnerable_list(&scores.ids, solution, &susceptibility, clusters, labeling.threshold_sd)?;
        self.load_titles()?;
        let titles = self.titles.clone().unwrap_or_default();
        let s = &mut self.manifest.summary;
        s.vulnerable_clusters = Some(report.vulnerable_clusters.iter().map(|c| c + 1).collect());
        s.vulnerable_occupations = Some(report.vulnerable_occupations.len());
        self.write("vulnerability.csv", &report::vulnerability_table(&report))?;
        self.write("vulnerability_summary.txt", &report::vulnerability_summary(&report))?;
        self.write("vulnerable_list.tsv", &report::vulnerable_list_table(&report, &titles))?;
        Ok((report.vulnerable_occupations.clone(), report.non_vulnerable_occupations()))
    }

    fn trends(&mut self, vulnerable: &[SocCode], non_vulnerable: &[SocCode]) -> Result<()> {
        self.load_employment()?;
        let series = self.employment.as_ref().expect("loaded");
        let subgroups: Vec<(String, Vec<SocCode>)> = self
            .config
            .trends
            .subgroups
            .iter()
            .map(|g| (g.label.clone(), g.soc_codes.clone()))
            .collect();
        let report = compare_sets(series, vulnerable, non_vulnerable, self.config.year_range(), &subgroups)?;
        for (label, g) in &report.groups {
            if !g.excluded.is_empty() {
                self.manifest.warnings.push(format!(
                    "trends: {} occupation(s) excluded from `{label}` (see trends.txt)",
                    g.excluded.len()
                ));
            }
        }
        self.manifest.summary.growth_ratio = report.ratio_vulnerable_to_nonvulnerable;
        self.write("trends.csv", &report::trends_table(&report))?;
        self.write("trends_summary.csv", &report::trends_summary_table(&report))?;
        self.write("trends.txt", &report::trends_text(&report))
    }

    fn plot(&mut self) -> Result<()> {
        let scree = self.required("scree.csv")?;
        let kscan = self.required("kscan.csv")?;
        let scree = render(&report::read_scree_table(&scree)?, PlotKind::Scree)?;
        let kscan = render(&report::read_kscan_table(&kscan)?, PlotKind::SilhouetteScan)?;
        self.write("scree.svg", &scree)?;
        self.write("kscan.svg", &kscan)
    }
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Validation { line, message } => Error::Validation {
            line,
            message: format!("{}: {message}", path.display()),
        },
        Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
        other => other,
    }
}

/// Accepts pre-standardized input: every column must have mean 0 and
/// sample sd 1 within 1e-6.
fn check_standardized(matrix: &OccupationMatrix) -> Result<OccupationMatrix> {
    let n = matrix.n_occupations();
    if n < 3 {
        return Err(Error::Parameter(format!("need at least 3 occupations, got {n}")));
    }
    for (j, col) in matrix.values.column_iter().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        if mean.abs() > 1e-6 || (var.sqrt() - 1.0).abs() > 1e-6 {
            return Err(Error::Config(format!(
                "standardize is false but attribute `{}` is not z-scored (mean {mean}, sd {})",
                matrix.attribute_ids[j],
                var.sqrt()
            )));
        }
    }
    let mut z = matrix.clone();
    z.standardized = true;
    Ok(z)
}

fn factor_summary(solution: &crate::factors::FactorSolution, labels: &[String]) -> String {
    use std::fmt::Write as _;
    let opt = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), |x| x.to_string());
    let mut s = String::new();
    let _ = writeln!(s, "factors: {}", solution.n_factors());
    let _ = writeln!(s, "paf_iterations: {}", solution.iterations);
    for (label, ss) in labels.iter().zip(solution.ss_loadings()) {
        let _ = writeln!(s, "ss_loadings[{label}]: {ss}");
    }
    if let Some(fit) = &solution.fit {
        let _ = writeln!(s, "rmsr: {}", fit.rmsr);
        let _ = writeln!(s, "chi_square: {}", opt(fit.chi_square));
        let _ = writeln!(s, "df: {}", fit.df);
        let _ = writeln!(s, "baseline_chi_square: {}", fit.baseline_chi_square);
        let _ = writeln!(s, "baseline_df: {}", fit.baseline_df);
        let _ = writeln!(s, "tli: {}", opt(fit.tli));
        let _ = writeln!(s, "rmsea: {}", opt(fit.rmsea));
        let _ = writeln!(s, "bic: {}", opt(fit.bic));
    }
    for w in &solution.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}
