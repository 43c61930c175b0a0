//! JSON file formats.

use std::fs;
use std::io::Write;
use std::path::Path;

use ofwpep_core::linalg::Matrix;
use ofwpep_core::pep::{
    ConstraintKey, ConstraintTag, Direction, GramBasis, GramConstraint, GramSdp, SymSparse,
};
use ofwpep_core::sdp::{Residuals, SdpSolution, Sense, SolveStatus};
use ofwpep_core::witness::WorstCase;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> AppResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| AppError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| AppError::Input(format!("{}: {e}", path.display())))
}

/// Writes pretty JSON to `path`, or to stdout when `path` is `None`.
pub fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> AppResult<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SenseFile {
    Le,
    Eq,
}

impl From<Sense> for SenseFile {
    fn from(s: Sense) -> Self {
        match s {
            Sense::Le => Self::Le,
            Sense::Eq => Self::Eq,
        }
    }
}

impl From<SenseFile> for Sense {
    fn from(s: SenseFile) -> Self {
        match s {
            SenseFile::Le => Self::Le,
            SenseFile::Eq => Self::Eq,
        }
    }
}

/// One constraint `⟨A, G⟩ (≤ | =) rhs`; entries are upper-triangle
/// `(i, j, A_ij)` triplets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintFile {
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: f64,
    pub sense: SenseFile,
    pub tag: ConstraintTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub key: Option<ConstraintKey>,
}

/// Sparse Gram program, suitable for external solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GramSdpFile {
    pub dim: usize,
    #[serde(default)]
    pub labels: Vec<String>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    pub objective: Vec<(usize, usize, f64)>,
    pub constraints: Vec<ConstraintFile>,
}

fn default_direction() -> Direction {
    Direction::Max
}

impl From<&GramSdp> for GramSdpFile {
    fn from(p: &GramSdp) -> Self {
        Self {
            dim: p.dim(),
            labels: p.basis.labels.clone(),
            direction: p.direction,
            objective: p.objective.triplets(),
            constraints: p
                .constraints
                .iter()
                .map(|c| ConstraintFile {
                    entries: c.matrix.triplets(),
                    rhs: c.rhs,
                    sense: c.sense.into(),
                    tag: c.tag,
                    key: (c.key != ConstraintKey::Other).then_some(c.key),
                })
                .collect(),
        }
    }
}

impl GramSdpFile {
    pub fn into_problem(self) -> AppResult<GramSdp> {
        let labels = if self.labels.is_empty() {
            (0..self.dim).map(|i| format!("e{i}")).collect()
        } else {
            self.labels
        };
        if labels.len() != self.dim {
            return Err(AppError::Input(format!(
                "{} labels for dimension {}",
                labels.len(),
                self.dim
            )));
        }
        let basis = GramBasis::new(labels)?;
        let objective = SymSparse::from_triplets(self.dim, &self.objective)?;
        let constraints = self
            .constraints
            .into_iter()
            .map(|c| {
                Ok(GramConstraint {
                    matrix: SymSparse::from_triplets(self.dim, &c.entries)?,
                    rhs: c.rhs,
                    sense: c.sense.into(),
                    tag: c.tag,
                    key: c.key.unwrap_or(ConstraintKey::Other),
                })
            })
            .collect::<AppResult<Vec<_>>>()?;
        let p = GramSdp {
            basis,
            objective,
            constraints,
            direction: self.direction,
        };
        p.check()?;
        Ok(p)
    }
}

/// Solver output with residuals and metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub status: SolveStatus,
    pub method: String,
    pub iterations: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl From<&SdpSolution> for SolutionFile {
    fn from(s: &SdpSolution) -> Self {
        Self {
            status: s.status,
            method: s.method.to_string(),
            iterations: s.iterations,
            primal_objective: s.primal_objective,
            dual_objective: s.dual_objective,
            residuals: s.residuals,
            x: s.x.to_rows(),
            y: s.y.clone(),
        }
    }
}

impl SolutionFile {
    pub fn gram(&self) -> AppResult<Matrix> {
        Matrix::from_rows(&self.x).ok_or_else(|| AppError::Input("ragged matrix".into()))
    }
}

/// Adversarial instance with the hull it lives in and its regret.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algo: Option<String>,
    #[serde(rename = "L")]
    pub lipschitz: f64,
    #[serde(rename = "D")]
    pub diameter: f64,
    pub witness: WorstCase,
    pub hull: Vec<Vec<f64>>,
    pub regret: f64,
}
