//! JSON file formats for graphs, corners, models and tau specs.
//!
//! Complex numbers are written `[re, im]`; on input a bare number is also
//! accepted. Matrices are row-major arrays of complex numbers. Paths inside a
//! model file are resolved relative to that file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::model::{
    CornerAssignment, CouplingMode, Group, ModelSpec, TruncationPolicy, WeightConvention,
};
use crate::ribbon::{GraphFile, Label, RibbonGraph};
use crate::symfun::{PowerSums, SpectralMatrix};
use crate::tau::{HypTauSpec, RationalWeight};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(self) -> C64 {
        match self {
            ComplexValue::Real(re) => C64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        ComplexValue::Pair([z.re, z.im])
    }
}

pub fn complex_pair(z: C64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn matrix_to_json(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex_pair(m[(i, j)])).collect()).collect()
}

pub fn matrix_from_json(rows: &[Vec<ComplexValue>]) -> Result<CMatrix> {
    let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|z| z.value()).collect()).collect();
    crate::linalg::square_from_rows(rows)
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| {
        Error::Parse(format!("{what}: {e} (line {}, column {})", e.line(), e.column()))
    })
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

pub fn parse_graph(text: &str) -> Result<RibbonGraph> {
    RibbonGraph::from_file(&parse_json::<GraphFile>(text, "graph file")?)
}

pub fn load_graph(path: &Path) -> Result<RibbonGraph> {
    parse_graph(&read_text(path)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CornerFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub corners: BTreeMap<String, Vec<Vec<ComplexValue>>>,
}

pub fn parse_corners(text: &str) -> Result<CornerAssignment> {
    let file: CornerFile = parse_json(text, "corner file")?;
    let mut matrices = BTreeMap::new();
    for (key, rows) in &file.corners {
        let label: Label = key
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("corner file: label {key:?} is not an integer")))?;
        let m = matrix_from_json(rows)
            .map_err(|e| Error::Parse(format!("corner file: corners.{key}: {e}")))?;
        matrices.insert(label, m);
    }
    CornerAssignment::new(file.n, matrices)
}

pub fn corners_to_json(corners: &CornerAssignment) -> serde_json::Value {
    let map: serde_json::Map<String, serde_json::Value> = corners
        .matrices()
        .iter()
        .map(|(l, m)| (l.to_string(), serde_json::json!(matrix_to_json(m))))
        .collect();
    serde_json::json!({ "N": corners.dim(), "corners": map })
}

pub fn load_corners(path: &Path) -> Result<CornerAssignment> {
    parse_corners(&read_text(path)?)
}

/// Coupling data as written in a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingSpec {
    /// `p_1 = 1`, higher power sums zero.
    PInfinity,
    /// `p_m = u` for every `m`.
    Constant(ComplexValue),
    /// `p_1 = c`, higher power sums zero.
    P1Only(ComplexValue),
    /// Explicit `p_1, p_2, …`.
    Values(Vec<ComplexValue>),
}

impl CouplingSpec {
    pub fn resolve(&self, degree: usize) -> Result<PowerSums<C64>> {
        let degree = degree.max(1);
        Ok(match self {
            CouplingSpec::PInfinity => PowerSums::p_infinity(degree),
            CouplingSpec::Constant(u) => PowerSums::constant(u.value(), degree),
            CouplingSpec::P1Only(c) => PowerSums::p1_only(c.value(), degree),
            CouplingSpec::Values(v) => PowerSums::new(v.iter().map(|z| z.value()).collect())?,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub graph: PathBuf,
    pub corners: PathBuf,
    pub group: Group,
    #[serde(default)]
    pub mode: CouplingMode,
    pub couplings: Vec<CouplingSpec>,
    #[serde(default)]
    pub convention: WeightConvention,
}

impl ModelFile {
    /// Builds the model with couplings resolved at `degree`.
    pub fn build(&self, base: &Path, degree: usize) -> Result<ModelSpec> {
        let graph = load_graph(&base.join(&self.graph))?;
        let corners = load_corners(&base.join(&self.corners))?;
        let couplings =
            self.couplings.iter().map(|c| c.resolve(degree)).collect::<Result<Vec<_>>>()?;
        ModelSpec::new(self.group, graph, corners, couplings, self.mode, self.convention)
    }
}

pub fn load_model(path: &Path, degree: usize) -> Result<ModelSpec> {
    let file: ModelFile = parse_json(&read_text(path)?, "model file")?;
    file.build(path.parent().unwrap_or(Path::new(".")), degree)
}

/// Spectral argument written either as a matrix or as an eigenvalue list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralInput {
    Matrix(Vec<Vec<ComplexValue>>),
    Eigenvalues(Vec<ComplexValue>),
}

impl SpectralInput {
    pub fn resolve(&self) -> Result<SpectralMatrix<C64>> {
        match self {
            SpectralInput::Matrix(rows) => SpectralMatrix::from_matrix(matrix_from_json(rows)?),
            SpectralInput::Eigenvalues(v) => {
                SpectralMatrix::from_eigenvalues(v.iter().map(|z| z.value()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TauFile {
    pub couplings: CouplingSpec,
    pub spectrum: Vec<ComplexValue>,
    pub r: RationalWeight,
    pub order: Option<usize>,
    /// KP times at the base point; defaults to all zero.
    #[serde(default)]
    pub base: Vec<ComplexValue>,
}

impl TauFile {
    /// The series at degree `order`, falling back to the file's own order.
    pub fn spec(&self, order: Option<usize>) -> Result<HypTauSpec> {
        let d = order.or(self.order).unwrap_or(crate::model::DEFAULT_ORDER);
        let spectrum =
            SpectralMatrix::from_eigenvalues(self.spectrum.iter().map(|z| z.value()).collect())?;
        let weight = self.r.to_weight(d, self.spectrum.len())?;
        HypTauSpec::new(self.couplings.resolve(d)?, spectrum, weight, TruncationPolicy::new(d))
    }

    pub fn base_point(&self) -> Result<PowerSums<C64>> {
        if self.base.is_empty() {
            return Ok(PowerSums::zero(1));
        }
        PowerSums::new(self.base.iter().map(|z| z.value()).collect())
    }
}

pub fn parse_tau(text: &str) -> Result<TauFile> {
    parse_json(text, "tau file")
}

pub fn load_tau(path: &Path) -> Result<TauFile> {
    parse_tau(&read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_file_round_trip() {
        let text = r#"{"N": 2, "corners": {
            "1": [[[1, 0], [0, 0.5]], [[0, 0], 2]],
            "-1": [[1, 0], [0, 1]]
        }}"#;
        let corners = parse_corners(text).unwrap();
        assert_eq!(corners.get(1).unwrap()[(0, 1)], C64::new(0.0, 0.5));
        assert_eq!(corners.get(1).unwrap()[(1, 1)], C64::new(2.0, 0.0));
        let again = parse_corners(&corners_to_json(&corners).to_string()).unwrap();
        assert_eq!(again, corners);
    }

    #[test]
    fn bad_corner_files() {
        assert!(matches!(parse_corners("{\"N\": 2"), Err(Error::Parse(_))));
        let ragged = r#"{"N": 2, "corners": {"1": [[1, 2], [3]]}}"#;
        assert!(matches!(parse_corners(ragged), Err(Error::Parse(m)) if m.contains("corners.1")));
        let wrong = r#"{"N": 3, "corners": {"1": [[1, 0], [0, 1]]}}"#;
        assert!(matches!(parse_corners(wrong), Err(Error::Shape(_))));
        let label = r#"{"N": 1, "corners": {"x": [[1]]}}"#;
        assert!(matches!(parse_corners(label), Err(Error::Parse(_))));
    }

    #[test]
    fn coupling_specs() {
        let specs: Vec<CouplingSpec> =
            serde_json::from_str(r#"["p_infinity", {"constant": 2}, {"values": [[0.1, 0.2], 0.3]}]"#)
                .unwrap();
        let p = specs[0].resolve(3).unwrap();
        assert_eq!(p.values(), &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        assert_eq!(specs[1].resolve(2).unwrap().get(2), C64::new(2.0, 0.0));
        assert_eq!(specs[2].resolve(9).unwrap().degree(), 2);
    }

    #[test]
    fn model_file_relative_paths() {
        let dir = std::env::temp_dir().join(format!("ribbonsum-io-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join("g.json"), r#"{"n": 1, "vertices": [[1, -1]]}"#).unwrap();
        std::fs::write(
            dir.join("c.json"),
            r#"{"N": 1, "corners": {"1": [[0.5]], "-1": [[0.5]]}}"#,
        )
        .unwrap();
        std::fs::write(
            dir.join("m.json"),
            r#"{"graph": "g.json", "corners": "c.json", "group": "u", "couplings": ["p_infinity"]}"#,
        )
        .unwrap();
        let model = load_model(&dir.join("m.json"), 6).unwrap();
        assert_eq!(model.graph.face_count(), 2);
        assert_eq!(model.convention, WeightConvention::CALIBRATED);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
