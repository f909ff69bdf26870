use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::synthetic::mappings::MappingKind;

/// Per-component parameters of a generated family, kept alongside the data
/// so oracle checks can rebuild the exact densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyParams {
    CorrelatedGaussian {
        rho: Vec<f64>,
    },
    Student {
        dof: u32,
        rho: Vec<f64>,
        kappa: f64,
        correction: f64,
    },
    SmoothedUniform {
        eps: Vec<f64>,
    },
}

impl FamilyParams {
    pub fn family_tag(&self) -> &'static str {
        match self {
            FamilyParams::CorrelatedGaussian { .. } => "correlated_gaussian",
            FamilyParams::Student { .. } => "student",
            FamilyParams::SmoothedUniform { .. } => "smoothed_uniform",
        }
    }
}

/// Paired samples with their exact ground-truth MI in nats and the
/// generation metadata needed to reproduce them.
#[derive(Debug, Clone)]
pub struct LabeledDatasetPair {
    pub x: Matrix,
    pub y: Matrix,
    pub true_mi: f64,
    pub params: FamilyParams,
    pub mappings: Vec<MappingKind>,
    pub seed: u64,
}

/// Sidecar metadata written next to the samples CSV.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub true_mi: f64,
    pub samples: usize,
    pub dim_x: usize,
    pub dim_y: usize,
    pub seed: u64,
    pub mappings: Vec<MappingKind>,
    #[serde(flatten)]
    pub params: FamilyParams,
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

impl LabeledDatasetPair {
    pub fn samples(&self) -> usize {
        self.x.rows()
    }

    pub fn dim_x(&self) -> usize {
        self.x.cols()
    }

    pub fn dim_y(&self) -> usize {
        self.y.cols()
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            true_mi: self.true_mi,
            samples: self.samples(),
            dim_x: self.dim_x(),
            dim_y: self.dim_y(),
            seed: self.seed,
            mappings: self.mappings.clone(),
            params: self.params.clone(),
        }
    }

    /// Samples as CSV (header `x_0..,y_0..`) plus a JSON metadata sidecar at
    /// `<path>.meta.json`. Doubles carry 17 significant digits so re-reading
    /// reproduces them bit-exactly.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let mut header: Vec<String> = (0..self.dim_x()).map(|j| format!("x_{j}")).collect();
        header.extend((0..self.dim_y()).map(|j| format!("y_{j}")));
        writeln!(out, "{}", header.join(","))?;
        for i in 0..self.samples() {
            let mut fields: Vec<String> = self.x.row(i).iter().map(|&v| fmt17(v)).collect();
            fields.extend(self.y.row(i).iter().map(|&v| fmt17(v)));
            writeln!(out, "{}", fields.join(","))?;
        }
        out.flush()?;
        let meta_path = sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.meta())
            .map_err(|e| Error::Serialization(e.to_string()))?;
        std::fs::write(meta_path, json)?;
        Ok(())
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let meta: DatasetMeta = serde_json::from_str(&std::fs::read_to_string(sidecar_path(path))?)
            .map_err(|e| Error::Serialization(e.to_string()))?;
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Serialization("empty dataset csv".into()))?;
        let cols = header.split(',').count();
        if cols != meta.dim_x + meta.dim_y {
            return Err(Error::Serialization("csv header does not match sidecar dims".into()));
        }
        let mut x_rows = Vec::new();
        let mut y_rows = Vec::new();
        for line in lines {
            if line.is_empty() {
                continue;
            }
            let vals: Vec<f64> = line
                .split(',')
                .map(|f| f.parse::<f64>().map_err(|e| Error::Serialization(e.to_string())))
                .collect::<Result<_>>()?;
            if vals.len() != cols {
                return Err(Error::Serialization("ragged csv row".into()));
            }
            x_rows.push(vals[..meta.dim_x].to_vec());
            y_rows.push(vals[meta.dim_x..].to_vec());
        }
        Ok(LabeledDatasetPair {
            x: Matrix::from_rows(&x_rows)?,
            y: Matrix::from_rows(&y_rows)?,
            true_mi: meta.true_mi,
            params: meta.params,
            mappings: meta.mappings,
            seed: meta.seed,
        })
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta.json");
    std::path::PathBuf::from(s)
}
