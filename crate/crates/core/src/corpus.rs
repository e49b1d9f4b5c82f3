//! Input parsing, merging and standardization of occupation-attribute data.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::Read;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard Occupational Classification code, `NN-NNNN` or `NN-NNNN.NN`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SocCode(String);

impl SocCode {
    pub fn parse(raw: &str) -> Result<Self> {
        let raw = raw.trim();
        if is_soc_code(raw) {
            Ok(SocCode(raw.to_owned()))
        } else {
            Err(Error::Format(format!("`{raw}` is not a SOC code")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The 6-digit BLS form (`NN-NNNN`), used when matching against
    /// employment data.
    pub fn six_digit(&self) -> &str {
        &self.0[..7]
    }
}

impl fmt::Display for SocCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for SocCode {
    type Error = Error;
    fn try_from(value: String) -> Result<Self> {
        SocCode::parse(&value)
    }
}

impl From<SocCode> for String {
    fn from(value: SocCode) -> Self {
        value.0
    }
}

fn is_soc_code(s: &str) -> bool {
    let b = s.as_bytes();
    let digits = |r: std::ops::Range<usize>| b[r].iter().all(u8::is_ascii_digit);
    match b.len() {
        7 => digits(0..2) && b[2] == b'-' && digits(3..7),
        10 => digits(0..2) && b[2] == b'-' && digits(3..7) && b[7] == b'.' && digits(8..10),
        _ => false,
    }
}

/// Field delimiter of an input table.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Comma,
    Tab,
}

impl Delimiter {
    pub fn byte(self) -> u8 {
        match self {
            Delimiter::Comma => b',',
            Delimiter::Tab => b'\t',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeObservation {
    pub soc_code: SocCode,
    pub attribute_id: String,
    /// Importance score in `[0, 100]`.
    pub importance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bottleneck,
    Hazard,
    Routine,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Bottleneck => "bottleneck",
            Category::Hazard => "hazard",
            Category::Routine => "routine",
        }
    }
}

impl std::str::FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bottleneck" => Ok(Category::Bottleneck),
            "hazard" => Ok(Category::Hazard),
            "routine" => Ok(Category::Routine),
            other => Err(Error::Format(format!("unknown attribute category `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub attribute_id: String,
    pub category: Category,
    pub label: String,
}

/// Ordered list of attributes selected for analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeCatalog {
    entries: Vec<CatalogEntry>,
}

impl AttributeCatalog {
    pub fn new(entries: Vec<CatalogEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if e.attribute_id.is_empty() {
                return Err(Error::Format("empty attribute_id in catalog".into()));
            }
            if !seen.insert(e.attribute_id.as_str()) {
                return Err(Error::Conflict(format!(
                    "attribute `{}` listed twice in catalog",
                    e.attribute_id
                )));
            }
        }
        Ok(AttributeCatalog { entries })
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.attribute_id.as_str())
    }

    pub fn count(&self, category: Category) -> usize {
        self.entries.iter().filter(|e| e.category == category).count()
    }

    /// Best-effort reconstruction of a 45-attribute selection (41 bottleneck
    /// and routine attributes plus 4 hazard work-context attributes) keyed by
    /// O*NET content-model element ids. Only a handful of these names are
    /// documented for the original study; the rest are a plausible
    /// reconstruction and should be replaced by a user catalog when the real
    /// selection is known.
    pub fn reconstructed_default() -> Self {
        use Category::*;
        const ENTRIES: &[(&str, Category, &str)] = &[
            ("2.A.1.a", Bottleneck, "Reading Comprehension"),
            ("2.A.1.b", Bottleneck, "Active Listening"),
            ("2.A.1.c", Bottleneck, "Writing"),
            ("2.A.1.d", Bottleneck, "Speaking"),
            ("2.A.2.a", Bottleneck, "Critical Thinking"),
            ("2.A.2.b", Bottleneck, "Active Learning"),
            ("2.A.2.c", Bottleneck, "Learning Strategies"),
            ("2.A.2.d", Bottleneck, "Monitoring"),
            ("2.B.1.a", Bottleneck, "Social Perceptiveness"),
            ("2.B.1.b", Bottleneck, "Coordination"),
            ("2.B.1.c", Bottleneck, "Persuasion"),
            ("2.B.1.d", Bottleneck, "Negotiation"),
            ("2.B.1.e", Bottleneck, "Instructing"),
            ("2.B.1.f", Bottleneck, "Service Orientation"),
            ("2.B.2.i", Bottleneck, "Complex Problem Solving"),
            ("2.B.3.a", Bottleneck, "Operations Analysis"),
            ("2.B.3.b", Bottleneck, "Technology Design"),
            ("2.B.4.e", Bottleneck, "Judgment and Decision Making"),
            ("2.B.4.g", Bottleneck, "Systems Analysis"),
            ("2.B.4.h", Bottleneck, "Systems Evaluation"),
            ("2.B.5.a", Bottleneck, "Time Management"),
            ("2.B.5.d", Bottleneck, "Management of Personnel Resources"),
            ("1.A.1.b.1", Bottleneck, "Fluency of Ideas"),
            ("1.A.1.b.2", Bottleneck, "Originality"),
            ("1.A.1.b.3", Bottleneck, "Problem Sensitivity"),
            ("1.A.1.b.4", Bottleneck, "Deductive Reasoning"),
            ("1.A.1.b.5", Bottleneck, "Inductive Reasoning"),
            ("4.A.4.a.5", Bottleneck, "Assisting and Caring for Others"),
            ("4.A.4.b.4", Bottleneck, "Guiding, Directing, and Motivating Subordinates"),
            ("4.A.2.b.2", Bottleneck, "Thinking Creatively"),
            ("1.A.1.b.6", Routine, "Information Ordering"),
            ("1.A.1.e.3", Routine, "Perceptual Speed"),
            ("1.A.2.a.1", Routine, "Arm-Hand Steadiness"),
            ("1.A.2.a.2", Routine, "Manual Dexterity"),
            ("1.A.2.a.3", Routine, "Finger Dexterity"),
            ("1.A.2.b.1", Routine, "Control Precision"),
            ("1.A.2.b.2", Routine, "Multilimb Coordination"),
            ("1.A.4.a.6", Routine, "Depth Perception"),
            ("4.C.2.d.1.i", Routine, "Spend Time Making Repetitive Motions"),
            ("4.C.3.b.7", Routine, "Importance of Repeating Same Tasks"),
            ("4.C.3.b.2", Routine, "Degree of Automation"),
            ("4.C.2.b.1.b", Hazard, "Very Hot or Cold Temperatures"),
            ("4.C.2.b.1.d", Hazard, "Exposed to Contaminants"),
            ("4.C.2.c.1.a", Hazard, "Exposed to Radiation"),
            ("4.C.2.c.1.d", Hazard, "Exposed to Hazardous Conditions"),
        ];
        let entries = ENTRIES
            .iter()
            .map(|&(id, category, label)| CatalogEntry {
                attribute_id: id.to_owned(),
                category,
                label: label.to_owned(),
            })
            .collect();
        AttributeCatalog { entries }
    }
}

struct Table<R: Read> {
    reader: csv::Reader<R>,
    columns: HashMap<String, usize>,
}

impl<R: Read> Table<R> {
    fn open(input: R, delimiter: Delimiter, required: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter.byte())
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(input);
        let header = reader
            .headers()
            .map_err(|e| Error::Format(format!("unreadable header: {e}")))?
            .clone();
        let columns: HashMap<String, usize> = header
            .iter()
            .enumerate()
            .map(|(i, h)| (h.to_ascii_lowercase(), i))
            .collect();
        for name in required {
            if !columns.contains_key(*name) {
                return Err(Error::Format(format!(
                    "header is missing column `{name}` (found: {})",
                    header.iter().collect::<Vec<_>>().join(", ")
                )));
            }
        }
        Ok(Table { reader, columns })
    }

    fn for_each_row(&mut self, mut f: impl FnMut(usize, Row<'_>) -> Result<()>) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let more = self
                .reader
                .read_record(&mut record)
                .map_err(|e| Error::Format(e.to_string()))?;
            if !more {
                return Ok(());
            }
            let line = record.position().map_or(0, |p| p.line() as usize);
            f(
                line,
                Row {
                    record: &record,
                    columns: &self.columns,
                },
            )?;
        }
    }
}

struct Row<'a> {
    record: &'a csv::StringRecord,
    columns: &'a HashMap<String, usize>,
}

impl<'a> Row<'a> {
    fn get(&self, name: &str) -> &'a str {
        self.record.get(self.columns[name]).unwrap_or("")
    }
}

fn parse_number(line: usize, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Validation {
            line,
            message: format!("{field} `{raw}` is not a finite number"),
        })
}

fn parse_soc(line: usize, raw: &str) -> Result<SocCode> {
    SocCode::parse(raw).map_err(|_| Error::Validation {
        line,
        message: format!("soc_code `{raw}` does not match NN-NNNN or NN-NNNN.NN"),
    })
}

/// Reads a `soc_code, attribute_id, importance` table.
pub fn parse_attribute_file<R: Read>(
    input: R,
    delimiter: Delimiter,
) -> Result<Vec<AttributeObservation>> {
    let mut table = Table::open(input, delimiter, &["soc_code", "attribute_id", "importance"])?;
    let mut out = Vec::new();
    table.for_each_row(|line, row| {
        let soc_code = parse_soc(line, row.get("soc_code"))?;
        let attribute_id = row.get("attribute_id").to_owned();
        if attribute_id.is_empty() {
            return Err(Error::Validation {
                line,
                message: "empty attribute_id".into(),
            });
        }
        let importance = parse_number(line, "importance", row.get("importance"))?;
        if !(0.0..=100.0).contains(&importance) {
            return Err(Error::Validation {
                line,
                message: format!("importance {importance} outside [0, 100]"),
            });
        }
        out.push(AttributeObservation {
            soc_code,
            attribute_id,
            importance,
        });
        Ok(())
    })?;
    Ok(out)
}

/// Reads an `attribute_id, category, label` table.
pub fn parse_catalog_file<R: Read>(input: R, delimiter: Delimiter) -> Result<AttributeCatalog> {
    let mut table = Table::open(input, delimiter, &["attribute_id", "category", "label"])?;
    let mut entries = Vec::new();
    table.for_each_row(|line, row| {
        let category = row.get("category").parse().map_err(|e: Error| Error::Validation {
            line,
            message: e.to_string(),
        })?;
        entries.push(CatalogEntry {
            attribute_id: row.get("attribute_id").to_owned(),
            category,
            label: row.get("label").to_owned(),
        });
        Ok(())
    })?;
    AttributeCatalog::new(entries)
}

/// Headcount per occupation and year.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmploymentSeries {
    records: BTreeMap<SocCode, BTreeMap<i32, f64>>,
}

impl EmploymentSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, code: SocCode, year: i32, headcount: f64) -> Result<()> {
        if !(headcount >= 0.0) || !headcount.is_finite() {
            return Err(Error::Parameter(format!(
                "headcount for {code} in {year} must be a non-negative number, got {headcount}"
            )));
        }
        let years = self.records.entry(code.clone()).or_default();
        if years.insert(year, headcount).is_some() {
            return Err(Error::Conflict(format!("duplicate entry for {code} in {year}")));
        }
        Ok(())
    }

    pub fn get(&self, code: &SocCode) -> Option<&BTreeMap<i32, f64>> {
        self.records.get(code)
    }

    /// Exact match first, then the 6-digit form of an O*NET code.
    pub fn lookup(&self, code: &SocCode) -> Option<&BTreeMap<i32, f64>> {
        self.records.get(code).or_else(|| {
            let six = SocCode(code.six_digit().to_owned());
            self.records.get(&six)
        })
    }

    pub fn codes(&self) -> impl Iterator<Item = &SocCode> {
        self.records.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SocCode, &BTreeMap<i32, f64>)> {
        self.records.iter()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Multiplies every headcount by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let records = self
            .records
            .iter()
            .map(|(k, ys)| (k.clone(), ys.iter().map(|(&y, &v)| (y, v * factor)).collect()))
            .collect();
        EmploymentSeries { records }
    }
}

/// Reads a `soc_code, year, employment` table.
pub fn parse_employment_file<R: Read>(input: R, delimiter: Delimiter) -> Result<EmploymentSeries> {
    let mut table = Table::open(input, delimiter, &["soc_code", "year", "employment"])?;
    let mut series = EmploymentSeries::new();
    table.for_each_row(|line, row| {
        let code = parse_soc(line, row.get("soc_code"))?;
        let raw_year = row.get("year");
        let year: i32 = raw_year.parse().map_err(|_| Error::Validation {
            line,
            message: format!("year `{raw_year}` is not an integer"),
        })?;
        let headcount = parse_number(line, "employment", row.get("employment"))?;
        if headcount < 0.0 {
            return Err(Error::Validation {
                line,
                message: format!("negative employment {headcount}"),
            });
        }
        series.insert(code, year, headcount).map_err(|e| match e {
            Error::Conflict(msg) => Error::Conflict(format!("line {line}: {msg}")),
            other => other,
        })
    })?;
    Ok(series)
}

/// Reads an optional `soc_code, title` table of occupation names.
pub fn parse_titles_file<R: Read>(
    input: R,
    delimiter: Delimiter,
) -> Result<BTreeMap<SocCode, String>> {
    let mut table = Table::open(input, delimiter, &["soc_code", "title"])?;
    let mut titles = BTreeMap::new();
    table.for_each_row(|line, row| {
        let code = parse_soc(line, row.get("soc_code"))?;
        if titles.insert(code.clone(), row.get("title").to_owned()).is_some() {
            return Err(Error::Conflict(format!("line {line}: title for {code} given twice")));
        }
        Ok(())
    })?;
    Ok(titles)
}

/// Occupations × attributes importance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupationMatrix {
    pub occupation_ids: Vec<SocCode>,
    pub attribute_ids: Vec<String>,
    pub values: DMatrix<f64>,
    pub standardized: bool,
}

impl OccupationMatrix {
    pub fn new(
        occupation_ids: Vec<SocCode>,
        attribute_ids: Vec<String>,
        values: DMatrix<f64>,
        standardized: bool,
    ) -> Result<Self> {
        if values.nrows() != occupation_ids.len() || values.ncols() != attribute_ids.len() {
            return Err(Error::Parameter(format!(
                "matrix is {}x{} but ids are {}x{}",
                values.nrows(),
                values.ncols(),
                occupation_ids.len(),
                attribute_ids.len()
            )));
        }
        if occupation_ids.iter().collect::<HashSet<_>>().len() != occupation_ids.len() {
            return Err(Error::Conflict("duplicate occupation id".into()));
        }
        if attribute_ids.iter().collect::<HashSet<_>>().len() != attribute_ids.len() {
            return Err(Error::Conflict("duplicate attribute id".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("matrix contains non-finite values".into()));
        }
        Ok(OccupationMatrix {
            occupation_ids,
            attribute_ids,
            values,
            standardized,
        })
    }

    pub fn n_occupations(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_attributes(&self) -> usize {
        self.values.ncols()
    }
}

/// Occupations dropped for incomplete attribute coverage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropReport {
    pub dropped: Vec<(SocCode, Vec<String>)>,
}

impl DropReport {
    pub fn len(&self) -> usize {
        self.dropped.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dropped.is_empty()
    }
}

/// Assembles the catalog-ordered matrix, dropping any occupation that lacks
/// one or more catalog attributes. Rows are ordered by SOC code.
pub fn build_matrix(
    observations: &[AttributeObservation],
    catalog: &AttributeCatalog,
) -> Result<(OccupationMatrix, DropReport)> {
    if catalog.is_empty() {
        return Err(Error::Parameter("catalog is empty".into()));
    }
    let column: HashMap<&str, usize> = catalog.ids().enumerate().map(|(i, id)| (id, i)).collect();
    let p = catalog.len();

    let mut cells: BTreeMap<&SocCode, Vec<Option<f64>>> = BTreeMap::new();
    for obs in observations {
        let row = cells.entry(&obs.soc_code).or_insert_with(|| vec![None; p]);
        if let Some(&j) = column.get(obs.attribute_id.as_str()) {
            if row[j].is_some() {
                return Err(Error::Conflict(format!(
                    "attribute `{}` given twice for {}",
                    obs.attribute_id, obs.soc_code
                )));
            }
            row[j] = Some(obs.importance);
        }
    }

    let ids: Vec<&str> = catalog.ids().collect();
    let mut report = DropReport::default();
    let mut kept_ids = Vec::new();
    let mut kept_rows = Vec::new();
    for (code, row) in cells {
        let missing: Vec<String> = row
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(j, _)| ids[j].to_owned())
            .collect();
        if missing.is_empty() {
            kept_ids.push(code.clone());
            kept_rows.push(row.into_iter().map(Option::unwrap).collect::<Vec<_>>());
        } else {
            report.dropped.push((code.clone(), missing));
        }
    }
    if kept_ids.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let values = crate::linalg::from_rows(&kept_rows);
    let matrix = OccupationMatrix::new(
        kept_ids,
        ids.into_iter().map(str::to_owned).collect(),
        values,
        false,
    )?;
    Ok((matrix, report))
}

/// Column-wise z-scores using the sample (n − 1) standard deviation.
pub fn standardize(matrix: &OccupationMatrix) -> Result<OccupationMatrix> {
    if matrix.standardized {
        return Err(Error::Parameter("matrix is already standardized".into()));
    }
    let n = matrix.n_occupations();
    if n < 3 {
        return Err(Error::Parameter(format!(
            "standardization needs at least 3 occupations, got {n}"
        )));
    }
    let mut values = matrix.values.clone();
    for (j, mut col) in values.column_iter_mut().enumerate() {
        let mean = col.iter().sum::<f64>() / n as f64;
        let ss: f64 = col.iter().map(|x| (x - mean) * (x - mean)).sum();
        let sd = (ss / (n as f64 - 1.0)).sqrt();
        let scale = col.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if !(sd > f64::EPSILON * scale.max(f64::MIN_POSITIVE)) {
            return Err(Error::DegenerateColumn(matrix.attribute_ids[j].clone()));
        }
        col.iter_mut().for_each(|x| *x = (*x - mean) / sd);
    }
    Ok(OccupationMatrix {
        occupation_ids: matrix.occupation_ids.clone(),
        attribute_ids: matrix.attribute_ids.clone(),
        values,
        standardized: true,
    })
}

/// Distinct occupations that appear in at least one observation.
pub fn distinct_occupations(observations: &[AttributeObservation]) -> BTreeSet<&SocCode> {
    observations.iter().map(|o| &o.soc_code).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn soc(s: &str) -> SocCode {
        SocCode::parse(s).unwrap()
    }

    fn catalog(ids: &[&str]) -> AttributeCatalog {
        AttributeCatalog::new(
            ids.iter()
                .map(|id| CatalogEntry {
                    attribute_id: id.to_string(),
                    category: Category::Bottleneck,
                    label: id.to_string(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn soc_patterns() {
        assert!(SocCode::parse("23-1011.00").is_ok());
        assert!(SocCode::parse("23-1011").is_ok());
        assert!(SocCode::parse("231011").is_err());
        assert!(SocCode::parse("23-1011.0").is_err());
        assert!(SocCode::parse("2a-1011").is_err());
        assert_eq!(soc("23-1011.00").six_digit(), "23-1011");
    }

    #[test]
    fn lawyer_speaking_row() {
        let text = "soc_code,attribute_id,importance\n23-1011.00, 2.A.1.d (Speaking), 70\n";
        let obs = parse_attribute_file(text.as_bytes(), Delimiter::Comma).unwrap();
        assert_eq!(obs.len(), 1);
        assert_eq!(obs[0].importance, 70.0);
        assert_eq!(obs[0].attribute_id, "2.A.1.d (Speaking)");
        assert_eq!(obs[0].soc_code.as_str(), "23-1011.00");
    }

    #[test]
    fn header_only_is_empty() {
        let obs =
            parse_attribute_file("soc_code\tattribute_id\timportance\n".as_bytes(), Delimiter::Tab)
                .unwrap();
        assert!(obs.is_empty());
    }

    #[test]
    fn importance_out_of_range_reports_line() {
        let text = "soc_code,attribute_id,importance\n23-1011.00,a,50\n23-2011.00,a,105\n";
        match parse_attribute_file(text.as_bytes(), Delimiter::Comma) {
            Err(Error::Validation { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header() {
        let text = "code,attribute,importance\n23-1011.00,a,50\n";
        assert!(matches!(
            parse_attribute_file(text.as_bytes(), Delimiter::Comma),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn employment_two_years() {
        let text = "soc_code,year,employment\n11-1011,2010,100\n11-1011,2011,101\n";
        let s = parse_employment_file(text.as_bytes(), Delimiter::Comma).unwrap();
        assert_eq!(s.get(&soc("11-1011")).unwrap().len(), 2);
    }

    #[test]
    fn employment_nine_years() {
        let mut text = String::from("soc_code,year,employment\n");
        for y in 2010..=2018 {
            text.push_str(&format!("11-1011,{y},{}\n", 1000 + y));
        }
        let s = parse_employment_file(text.as_bytes(), Delimiter::Comma).unwrap();
        assert_eq!(s.get(&soc("11-1011")).unwrap().len(), 9);
    }

    #[test]
    fn employment_duplicate_and_negative() {
        let dup = "soc_code,year,employment\n11-1011,2010,100\n11-1011,2010,120\n";
        assert!(matches!(
            parse_employment_file(dup.as_bytes(), Delimiter::Comma),
            Err(Error::Conflict(_))
        ));
        let neg = "soc_code,year,employment\n11-1011,2010,-1\n";
        assert!(matches!(
            parse_employment_file(neg.as_bytes(), Delimiter::Comma),
            Err(Error::Validation { line: 2, .. })
        ));
    }

    #[test]
    fn lookup_by_six_digit_prefix() {
        let mut s = EmploymentSeries::new();
        s.insert(soc("11-1011"), 2010, 5.0).unwrap();
        assert!(s.lookup(&soc("11-1011.03")).is_some());
        assert!(s.lookup(&soc("11-1021.00")).is_none());
    }

    fn obs(code: &str, attr: &str, v: f64) -> AttributeObservation {
        AttributeObservation {
            soc_code: soc(code),
            attribute_id: attr.into(),
            importance: v,
        }
    }

    #[test]
    fn build_drops_incomplete() {
        let mut o = Vec::new();
        for (i, code) in ["11-1011.00", "11-1021.00", "11-2011.00", "11-2021.00", "11-3011.00"]
            .iter()
            .enumerate()
        {
            o.push(obs(code, "a", 10.0 + i as f64));
            if i != 2 {
                o.push(obs(code, "b", 20.0));
            }
            o.push(obs(code, "zzz", 1.0));
        }
        let (m, report) = build_matrix(&o, &catalog(&["a", "b"])).unwrap();
        assert_eq!(m.n_occupations(), 4);
        assert_eq!(m.n_attributes(), 2);
        assert_eq!(report.dropped, vec![(soc("11-2011.00"), vec!["b".to_string()])]);
        assert!(!m.standardized);
        assert_eq!(m.attribute_ids, vec!["a", "b"]);
        assert_eq!(m.n_occupations() + report.len(), distinct_occupations(&o).len());
    }

    #[test]
    fn build_with_nothing_complete() {
        let o = vec![obs("11-1011.00", "a", 1.0)];
        assert!(matches!(
            build_matrix(&o, &catalog(&["a", "b"])),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn standardize_simple_column() {
        let m = OccupationMatrix::new(
            vec![soc("11-1011"), soc("11-1021"), soc("11-2011")],
            vec!["a".into()],
            DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]),
            false,
        )
        .unwrap();
        let z = standardize(&m).unwrap();
        assert_eq!(z.values.as_slice(), &[-1.0, 0.0, 1.0]);
        assert!(z.standardized);
    }

    #[test]
    fn standardize_constant_column() {
        let m = OccupationMatrix::new(
            vec![soc("11-1011"), soc("11-1021"), soc("11-2011")],
            vec!["a".into(), "flat".into()],
            DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 3.0, 5.0, 5.0, 5.0]),
            false,
        )
        .unwrap();
        match standardize(&m) {
            Err(Error::DegenerateColumn(id)) => assert_eq!(id, "flat"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn default_catalog_shape() {
        let c = AttributeCatalog::reconstructed_default();
        assert_eq!(c.len(), 45);
        assert_eq!(c.count(Category::Hazard), 4);
        assert_eq!(c.count(Category::Bottleneck) + c.count(Category::Routine), 41);
        assert!(AttributeCatalog::new(c.entries().to_vec()).is_ok());
    }

    #[test]
    fn catalog_file() {
        let text = "attribute_id,category,label\nx,hazard,X\ny,Routine,Y\n";
        let c = parse_catalog_file(text.as_bytes(), Delimiter::Comma).unwrap();
        assert_eq!(c.len(), 2);
        let bad = "attribute_id,category,label\nx,nope,X\n";
        assert!(parse_catalog_file(bad.as_bytes(), Delimiter::Comma).is_err());
        let dup = "attribute_id,category,label\nx,hazard,X\nx,routine,Y\n";
        assert!(matches!(
            parse_catalog_file(dup.as_bytes(), Delimiter::Comma),
            Err(Error::Conflict(_))
        ));
    }
}
