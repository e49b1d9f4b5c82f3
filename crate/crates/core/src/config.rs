//! Pipeline configuration: a single JSON document with a versioned schema.
//! Unknown keys are rejected. Relative input paths resolve against the
//! directory holding the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::{Metric, PamInit};
use crate::corpus::{Delimiter, SocCode};
use crate::error::{Error, Result};
use crate::factors::{
    factor_labels, PafOptions, ParallelAnalysisOptions, VarimaxOptions, DEFAULT_FACTOR_LABELS,
};
use crate::trends::YearRange;
use crate::vulnerability::{ClusterLabeling, Direction, SusceptibilityCriterion};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub schema_version: u32,
    /// Seeds parallel analysis and random PAM starts. Required.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Inputs,
    /// When false the attribute values must already be z-scores.
    #[serde(default = "yes")]
    pub standardize: bool,
    #[serde(default)]
    pub parallel_analysis: ParallelAnalysisConfig,
    #[serde(default)]
    pub factors: FactorConfig,
    #[serde(default)]
    pub scores: ScoreConfig,
    #[serde(default)]
    pub clustering: ClusterConfig,
    #[serde(default = "default_criteria")]
    pub criteria: Vec<CriterionConfig>,
    #[serde(default)]
    pub labeling: LabelingConfig,
    #[serde(default)]
    pub trends: TrendConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn yes() -> bool {
    true
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    /// One or more `soc_code, attribute_id, importance` tables, concatenated.
    pub attributes: Vec<InputFile>,
    /// Falls back to the built-in 45-attribute catalog when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<InputFile>,
    pub employment: InputFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub titles: Option<InputFile>,
}

/// A path, optionally with its delimiter: `"a.csv"` or
/// `{"path": "a.tsv", "delimiter": "tab"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputFile {
    Path(PathBuf),
    Detailed {
        path: PathBuf,
        #[serde(default)]
        delimiter: Delimiter,
    },
}

impl InputFile {
    pub fn path(&self) -> &Path {
        match self {
            InputFile::Path(p) | InputFile::Detailed { path: p, .. } => p,
        }
    }

    pub fn delimiter(&self) -> Delimiter {
        match self {
            InputFile::Path(p) => match p.extension().and_then(|e| e.to_str()) {
                Some("tsv") | Some("txt") => Delimiter::Tab,
                _ => Delimiter::Comma,
            },
            InputFile::Detailed { delimiter, .. } => *delimiter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Auto {
    Auto,
}

/// `"auto"` or a fixed count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Count {
    Auto(Auto),
    Fixed(usize),
}

impl Default for Count {
    fn default() -> Self {
        Count::Auto(Auto::Auto)
    }
}

impl Count {
    pub fn fixed(self) -> Option<usize> {
        match self {
            Count::Fixed(n) => Some(n),
            Count::Auto(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParallelAnalysisConfig {
    pub replicates: usize,
    pub quantile: f64,
}

impl Default for ParallelAnalysisConfig {
    fn default() -> Self {
        ParallelAnalysisConfig {
            replicates: 100,
            quantile: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FactorConfig {
    pub count: Count,
    pub rotate: bool,
    pub kaiser_normalize: bool,
    pub tol: f64,
    pub max_iter: usize,
    /// Names for the rotated factors, in order; padded with `unnamed-<k>`.
    pub labels: Vec<String>,
}

impl Default for FactorConfig {
    fn default() -> Self {
        let paf = PafOptions::default();
        FactorConfig {
            count: Count::default(),
            rotate: true,
            kaiser_normalize: false,
            tol: paf.tol,
            max_iter: paf.max_iter,
            labels: DEFAULT_FACTOR_LABELS.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMethod {
    #[default]
    Regression,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreConfig {
    pub method: ScoreMethod,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    #[default]
    Build,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClusterConfig {
    pub metric: Metric,
    /// Fixed k, or `"auto"` to take the best mean silhouette of the scan.
    pub k: Count,
    pub k_min: usize,
    pub k_max: usize,
    pub init: InitMode,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            metric: Metric::Euclidean,
            k: Count::default(),
            k_min: 2,
            k_max: 12,
            init: InitMode::Build,
        }
    }
}

/// A factor named by 0-based column index or by label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FactorRef {
    Index(usize),
    Label(String),
}

impl FactorRef {
    pub fn resolve(&self, labels: &[String]) -> Result<usize> {
        match self {
            FactorRef::Index(i) if *i < labels.len() => Ok(*i),
            FactorRef::Index(i) => Err(Error::Config(format!(
                "factor index {i} out of range for {} factors",
                labels.len()
            ))),
            FactorRef::Label(l) => labels.iter().position(|x| x == l).ok_or_else(|| {
                Error::Config(format!(
                    "no factor labelled `{l}` (labels: {})",
                    labels.join(", ")
                ))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriterionConfig {
    pub factor: FactorRef,
    pub direction: Direction,
    pub fraction: f64,
    /// Defaults to `<factor>-<direction>-<percent>%`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

/// hazard-top-20%, problem-solving-bottom-20% and dexterity-top-20%, with
/// dexterity mapped to the unnamed seventh factor.
pub fn default_criteria() -> Vec<CriterionConfig> {
    let c = |factor: &str, direction, label: &str| CriterionConfig {
        factor: FactorRef::Label(factor.into()),
        direction,
        fraction: 0.2,
        label: Some(label.into()),
    };
    vec![
        c("hazard", Direction::Top, "hazard-top-20%"),
        c("problem-solving", Direction::Bottom, "problem-solving-bottom-20%"),
        c("unnamed-7", Direction::Top, "dexterity-top-20%"),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LabelingConfig {
    pub susceptible_factors: Vec<FactorRef>,
    pub bottleneck_factors: Vec<FactorRef>,
    pub threshold_sd: f64,
}

impl Default for LabelingConfig {
    fn default() -> Self {
        let refs = |xs: &[&str]| xs.iter().map(|s| FactorRef::Label(s.to_string())).collect();
        LabelingConfig {
            susceptible_factors: refs(&["hazard"]),
            bottleneck_factors: refs(&["problem-solving", "negotiation", "empathy", "artistic"]),
            threshold_sd: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Subgroup {
    pub label: String,
    pub soc_codes: Vec<SocCode>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrendConfig {
    pub start_year: i32,
    pub end_year: i32,
    pub subgroups: Vec<Subgroup>,
}

impl Default for TrendConfig {
    fn default() -> Self {
        TrendConfig {
            start_year: 2010,
            end_year: 2018,
            subgroups: Vec::new(),
        }
    }
}

impl PipelineConfig {
    /// Reads and validates a config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_json(&text)?;
        config.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default();
        Ok(config)
    }

    /// Parses and validates; relative paths resolve against the working
    /// directory until `base_dir` is set.
    pub fn from_json(text: &str) -> Result<Self> {
        let config: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.seed.is_none() {
            return bad("`seed` is required (parallel analysis is stochastic)".into());
        }
        if self.inputs.attributes.is_empty() {
            return bad("inputs.attributes lists no files".into());
        }
        let pa = &self.parallel_analysis;
        if pa.replicates == 0 {
            return bad("parallel_analysis.replicates must be at least 1".into());
        }
        if !(pa.quantile > 0.0 && pa.quantile < 1.0) {
            return bad(format!("parallel_analysis.quantile {} outside (0, 1)", pa.quantile));
        }
        let f = &self.factors;
        if f.count == Count::Fixed(0) {
            return bad("factors.count must be at least 1".into());
        }
        if !(f.tol > 0.0 && f.tol.is_finite()) {
            return bad(format!("factors.tol {} must be positive", f.tol));
        }
        if f.max_iter == 0 {
            return bad("factors.max_iter must be at least 1".into());
        }
        let mut seen = std::collections::BTreeSet::new();
        for l in &f.labels {
            if l.is_empty() || !seen.insert(l) {
                return bad(format!("factor label `{l}` is empty or repeated"));
            }
        }
        let c = &self.clustering;
        if c.k_min < 2 || c.k_max < c.k_min {
            return bad(format!(
                "clustering scan needs 2 <= k_min <= k_max (got {}..={})",
                c.k_min, c.k_max
            ));
        }
        if let Some(k) = c.k.fixed() {
            if k < 2 {
                return bad(format!("clustering.k must be at least 2 (got {k})"));
            }
        }
        for cr in &self.criteria {
            if !(cr.fraction > 0.0 && cr.fraction <= 1.0) {
                return bad(format!("criterion fraction {} outside (0, 1]", cr.fraction));
            }
        }
        let t = self.labeling.threshold_sd;
        if !(t >= 0.0 && t.is_finite()) {
            return bad(format!("labeling.threshold_sd {t} must be non-negative"));
        }
        YearRange::new(self.trends.start_year, self.trends.end_year)
            .map_err(|e| Error::Config(e.to_string()))?;
        let mut groups = std::collections::BTreeSet::new();
        for g in &self.trends.subgroups {
            if g.label.is_empty() || !groups.insert(&g.label) {
                return bad(format!("trend sub-group label `{}` is empty or repeated", g.label));
            }
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated config has a seed")
    }

    pub fn parallel_analysis_options(&self) -> ParallelAnalysisOptions {
        ParallelAnalysisOptions {
            replicates: self.parallel_analysis.replicates,
            quantile: self.parallel_analysis.quantile,
            seed: self.seed(),
        }
    }

    pub fn paf_options(&self) -> PafOptions {
        PafOptions {
            tol: self.factors.tol,
            max_iter: self.factors.max_iter,
        }
    }

    pub fn varimax_options(&self) -> VarimaxOptions {
        VarimaxOptions {
            normalize: self.factors.kaiser_normalize,
            ..VarimaxOptions::default()
        }
    }

    pub fn pam_init(&self) -> PamInit {
        match self.clustering.init {
            InitMode::Build => PamInit::Build,
            InitMode::Random => PamInit::Random { seed: self.seed() },
        }
    }

    pub fn year_range(&self) -> YearRange {
        YearRange {
            start: self.trends.start_year,
            end: self.trends.end_year,
        }
    }

    /// Labels for an `m`-factor solution.
    pub fn labels_for(&self, m: usize) -> Vec<String> {
        factor_labels(&self.factors.labels, m)
    }

    pub fn criteria_for(&self, labels: &[String]) -> Result<Vec<SusceptibilityCriterion>> {
        self.criteria
            .iter()
            .map(|c| {
                let index = c.factor.resolve(labels)?;
                let label = c.label.clone().unwrap_or_else(|| {
                    let dir = match c.direction {
                        Direction::Top => "top",
                        Direction::Bottom => "bottom",
                    };
                    format!("{}-{dir}-{}%", labels[index], c.fraction * 100.0)
                });
                Ok(SusceptibilityCriterion::new(index, c.direction, c.fraction, &label))
            })
            .collect()
    }

    pub fn labeling_for(&self, labels: &[String]) -> Result<ClusterLabeling> {
        let resolve = |refs: &[FactorRef]| -> Result<Vec<usize>> {
            refs.iter().map(|r| r.resolve(labels)).collect()
        };
        Ok(ClusterLabeling {
            susceptible_factors: resolve(&self.labeling.susceptible_factors)?,
            bottleneck_factors: resolve(&self.labeling.bottleneck_factors)?,
            threshold_sd: self.labeling.threshold_sd,
        })
    }
}
