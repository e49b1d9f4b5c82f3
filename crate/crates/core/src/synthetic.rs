//! Seeded synthetic corpora with planted structure, used by the test suites,
//! the benchmarks and the bundled example fixture.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::corpus::{
    AttributeCatalog, AttributeObservation, CatalogEntry, Category, EmploymentSeries,
    OccupationMatrix, SocCode,
};
use crate::error::{Error, Result};

const MAJOR_GROUPS: [u32; 22] = [
    11, 13, 15, 17, 19, 21, 23, 25, 27, 29, 31, 33, 35, 37, 39, 41, 43, 45, 47, 49, 51, 53,
];

/// Detailed O*NET-style code for occupation `i` (`NN-NNNN.00`).
pub fn occupation_code(i: usize) -> SocCode {
    SocCode::parse(&format!("{}-{:04}.00", MAJOR_GROUPS[i % MAJOR_GROUPS.len()], 1000 + i))
        .expect("generated code is valid")
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Independent standard-normal entries.
pub fn noise_matrix(n: usize, p: usize, seed: u64) -> OccupationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = DMatrix::from_fn(n, p, |_, _| normal(&mut rng));
    matrix_from(values)
}

/// Two independent latent factors, each loading `loading` on half of `p`
/// attributes, plus unique noise.
pub fn planted_two_factor(n: usize, p: usize, loading: f64, seed: u64) -> OccupationMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unique = (1.0 - loading * loading).sqrt();
    let mut values = DMatrix::zeros(n, p);
    for i in 0..n {
        let f = [normal(&mut rng), normal(&mut rng)];
        for j in 0..p {
            values[(i, j)] = loading * f[j * 2 / p] + unique * normal(&mut rng);
        }
    }
    matrix_from(values)
}

fn matrix_from(values: DMatrix<f64>) -> OccupationMatrix {
    let (n, p) = values.shape();
    OccupationMatrix::new(
        (0..n).map(occupation_code).collect(),
        (0..p).map(|j| format!("X.{}", j + 1)).collect(),
        values,
        false,
    )
    .expect("generated matrix is valid")
}

/// Latent-space cluster centres (hazard, bottleneck) and sizes of the
/// composite fixture. Cluster 0 is the planted hazard-high group. Sizes and
/// centres keep the two latent factors uncorrelated across the sample.
pub const COMPOSITE_CLUSTERS: [((f64, f64), usize); 3] =
    [((2.5, 0.0), 40), ((-0.5, 2.0), 40), ((-0.5, -0.5), 160)];
pub const COMPOSITE_HAZARD_ATTRIBUTES: usize = 6;
pub const COMPOSITE_BOTTLENECK_ATTRIBUTES: usize = 4;
pub const COMPOSITE_LOADING: f64 = 0.85;
pub const COMPOSITE_LATENT_SD: f64 = 0.25;
pub const COMPOSITE_GROWTH: (f64, f64) = (0.01, 0.02);
pub const COMPOSITE_YEARS: (i32, i32) = (2010, 2018);

/// The composite corpus: two planted factors, three planted clusters and
/// planted employment growth (1% a year for the hazard-high cluster, 2% for
/// everyone else). One extra occupation lacks an attribute and is dropped.
#[derive(Debug, Clone)]
pub struct CompositeFixture {
    pub observations: Vec<AttributeObservation>,
    pub catalog: AttributeCatalog,
    pub employment: EmploymentSeries,
    pub titles: BTreeMap<SocCode, String>,
    /// Planted cluster of every complete occupation.
    pub planted: BTreeMap<SocCode, usize>,
    /// The incomplete occupation.
    pub dropped: SocCode,
}

impl CompositeFixture {
    pub fn generate(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ph = COMPOSITE_HAZARD_ATTRIBUTES;
        let pb = COMPOSITE_BOTTLENECK_ATTRIBUTES;
        let mut entries = Vec::new();
        for j in 0..ph {
            entries.push(CatalogEntry {
                attribute_id: format!("H.{}", j + 1),
                category: Category::Hazard,
                label: format!("Hazard exposure {}", j + 1),
            });
        }
        for j in 0..pb {
            entries.push(CatalogEntry {
                attribute_id: format!("B.{}", j + 1),
                category: Category::Bottleneck,
                label: format!("Bottleneck skill {}", j + 1),
            });
        }
        let catalog = AttributeCatalog::new(entries).expect("unique ids");

        let unique = (1.0 - COMPOSITE_LOADING * COMPOSITE_LOADING).sqrt();
        let mut observations = Vec::new();
        let mut employment = EmploymentSeries::new();
        let mut titles = BTreeMap::new();
        let mut planted = BTreeMap::new();
        let mut i = 0;
        for (cluster, &((ch, cb), size)) in COMPOSITE_CLUSTERS.iter().enumerate() {
            for _ in 0..size {
                let code = occupation_code(i);
                let h = ch + COMPOSITE_LATENT_SD * normal(&mut rng);
                let b = cb + COMPOSITE_LATENT_SD * normal(&mut rng);
                for (j, entry) in catalog.entries().iter().enumerate() {
                    let latent = if j < ph { h } else { b };
                    let z = COMPOSITE_LOADING * latent + unique * normal(&mut rng);
                    observations.push(AttributeObservation {
                        soc_code: code.clone(),
                        attribute_id: entry.attribute_id.clone(),
                        importance: (50.0 + 10.0 * z).clamp(0.0, 100.0),
                    });
                }
                let rate = if cluster == 0 {
                    COMPOSITE_GROWTH.0
                } else {
                    COMPOSITE_GROWTH.1
                };
                let bls = SocCode::parse(code.six_digit()).expect("six-digit prefix");
                let base = 1000.0 + 10.0 * i as f64;
                for y in COMPOSITE_YEARS.0..=COMPOSITE_YEARS.1 {
                    let v = base * (1.0 + rate).powi(y - COMPOSITE_YEARS.0);
                    employment.insert(bls.clone(), y, v).expect("unique year");
                }
                titles.insert(code.clone(), format!("Synthetic occupation {:03}", i + 1));
                planted.insert(code, cluster);
                i += 1;
            }
        }
        let dropped = occupation_code(i);
        for entry in catalog.entries().iter().skip(1) {
            observations.push(AttributeObservation {
                soc_code: dropped.clone(),
                attribute_id: entry.attribute_id.clone(),
                importance: 50.0,
            });
        }
        CompositeFixture {
            observations,
            catalog,
            employment,
            titles,
            planted,
            dropped,
        }
    }

    /// Occupations of the planted hazard-high cluster, sorted.
    pub fn hazard_cluster(&self) -> Vec<SocCode> {
        self.planted
            .iter()
            .filter(|(_, &c)| c == 0)
            .map(|(code, _)| code.clone())
            .collect()
    }

    /// Writes the data tables and a ready-to-run `config.json` into `dir`,
    /// returning the config path.
    pub fn write(&self, dir: &Path, seed: u64) -> Result<PathBuf> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut attrs = String::from("soc_code,attribute_id,importance\n");
        for o in &self.observations {
            attrs.push_str(&format!("{},{},{}\n", o.soc_code, o.attribute_id, o.importance));
        }
        write_file(&dir.join("attributes.csv"), &attrs)?;

        let mut catalog = String::from("attribute_id\tcategory\tlabel\n");
        for e in self.catalog.entries() {
            catalog.push_str(&format!("{}\t{}\t{}\n", e.attribute_id, e.category.as_str(), e.label));
        }
        write_file(&dir.join("catalog.tsv"), &catalog)?;

        let mut employment = String::from("soc_code,year,employment\n");
        for (code, years) in self.employment.iter() {
            for (y, v) in years {
                employment.push_str(&format!("{code},{y},{v}\n"));
            }
        }
        write_file(&dir.join("employment.csv"), &employment)?;

        let mut titles = String::from("soc_code,title\n");
        for (code, t) in &self.titles {
            titles.push_str(&format!("{code},{t}\n"));
        }
        write_file(&dir.join("titles.csv"), &titles)?;

        let config = composite_config(seed);
        let path = dir.join("config.json");
        write_file(&path, &config)?;
        Ok(path)
    }
}

/// Pipeline config matching [`CompositeFixture::write`].
pub fn composite_config(seed: u64) -> String {
    format!(
        r#"{{
  "schema_version": 1,
  "seed": {seed},
  "inputs": {{
    "attributes": ["attributes.csv"],
    "catalog": {{"path": "catalog.tsv", "delimiter": "tab"}},
    "employment": "employment.csv",
    "titles": "titles.csv"
  }},
  "parallel_analysis": {{"replicates": 100, "quantile": 0.95}},
  "factors": {{"count": "auto", "rotate": true, "labels": ["hazard", "bottleneck"]}},
  "clustering": {{"metric": "euclidean", "k": "auto", "k_min": 2, "k_max": 6}},
  "criteria": [
    {{"factor": "hazard", "direction": "top", "fraction": 0.2}},
    {{"factor": "bottleneck", "direction": "bottom", "fraction": 0.2}}
  ],
  "labeling": {{
    "susceptible_factors": ["hazard"],
    "bottleneck_factors": ["bottleneck"],
    "threshold_sd": 1.0
  }},
  "trends": {{"start_year": {}, "end_year": {}}},
  "output_dir": "out"
}}
"#,
        COMPOSITE_YEARS.0, COMPOSITE_YEARS.1
    )
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composite_shape() {
        let f = CompositeFixture::generate(1);
        let n: usize = COMPOSITE_CLUSTERS.iter().map(|c| c.1).sum();
        assert_eq!(f.planted.len(), n);
        assert_eq!(f.hazard_cluster().len(), 40);
        assert_eq!(f.observations.len(), n * 10 + 9);
        assert_eq!(f.employment.len(), n);
    }

    #[test]
    fn generators_are_seeded() {
        assert_eq!(noise_matrix(5, 3, 9), noise_matrix(5, 3, 9));
        assert_ne!(noise_matrix(5, 3, 9), noise_matrix(5, 3, 10));
        let a = CompositeFixture::generate(4);
        let b = CompositeFixture::generate(4);
        assert_eq!(a.observations, b.observations);
    }
}
