//! Turning command-line strings into library values.

use std::path::{Path, PathBuf};

use clap::Args;
use ribbonsum::io::{load_corners, load_graph, load_model, matrix_from_json, ComplexValue, CouplingSpec};
use ribbonsum::linalg::CMatrix;
use ribbonsum::model::{as_matrix, CouplingMode, Group, ModelSpec, WeightConvention};
use ribbonsum::partitions::Partition;
use ribbonsum::suite::test_pair;
use ribbonsum::symfun::SpectralMatrix;
use ribbonsum::{Error, Result, C64};
use serde::Deserialize;

/// Either a model file or the pieces of one.
#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Model file (graph, corners, group and couplings together).
    #[arg(long, value_name = "FILE", conflicts_with_all = ["graph", "corners"])]
    pub model: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
    #[arg(long, value_name = "FILE")]
    pub corners: Option<PathBuf>,
    /// One per coupled vertex: `p_infinity`, or JSON such as `{"constant": 0.5}`.
    #[arg(long = "coupling", value_name = "SPEC")]
    pub couplings: Vec<String>,
    #[arg(long, value_name = "vertex|face", default_value = "vertex")]
    pub mode: String,
    /// `calibrated` (default), `printed`, or JSON flags.
    #[arg(long, value_name = "NAME", default_value = "calibrated")]
    pub convention: String,
}

impl ModelArgs {
    /// Builds the model with couplings resolved at `degree`. An explicit
    /// `--group` overrides the model file.
    pub fn build(&self, group: Option<Group>, degree: usize) -> Result<ModelSpec> {
        if let Some(path) = &self.model {
            let model = load_model(path, degree)?;
            return match group {
                Some(g) if g != model.group => ModelSpec::new(
                    g,
                    model.graph,
                    model.corners,
                    model.couplings,
                    model.mode,
                    model.convention,
                ),
                _ => Ok(model),
            };
        }
        let (Some(graph), Some(corners)) = (&self.graph, &self.corners) else {
            return Err(Error::Config("a model needs --model, or both --graph and --corners".into()));
        };
        let graph = load_graph(graph)?;
        let corners = load_corners(corners)?;
        let mode = parse_mode(&self.mode)?;
        let slots = match mode {
            CouplingMode::Vertex => graph.vertex_count(),
            CouplingMode::Face => graph.face_count(),
        };
        let specs = if self.couplings.is_empty() {
            vec![CouplingSpec::PInfinity; slots]
        } else {
            self.couplings.iter().map(|s| parse_coupling(s)).collect::<Result<_>>()?
        };
        let couplings = specs.iter().map(|c| c.resolve(degree)).collect::<Result<Vec<_>>>()?;
        let convention = parse_convention(&self.convention)?;
        ModelSpec::new(group.unwrap_or(Group::U), graph, corners, couplings, mode, convention)
    }
}

fn parse_mode(s: &str) -> Result<CouplingMode> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| Error::Config(format!("unknown coupling mode '{s}' (vertex|face)")))
}

fn parse_coupling(s: &str) -> Result<CouplingSpec> {
    let word = s.replace('-', "_");
    let text = if s.trim_start().starts_with(['{', '"']) { s.to_string() } else { format!("\"{word}\"") };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("--coupling '{s}': {e}")))
}

pub fn parse_convention(s: &str) -> Result<WeightConvention> {
    match s {
        "calibrated" => Ok(WeightConvention::CALIBRATED),
        "printed" => Ok(WeightConvention::PRINTED),
        _ => serde_json::from_str(s).map_err(|e| Error::Parse(format!("--convention '{s}': {e}"))),
    }
}

/// `2,1` (or `2 1`); an empty string or `()` is the empty partition.
pub fn parse_partition(s: &str) -> Result<Partition> {
    let body = s.trim().trim_start_matches('(').trim_end_matches(')');
    let parts = body
        .split([',', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad partition part '{t}' in '{s}'"))))
        .collect::<Result<Vec<_>>>()?;
    Partition::new(parts)
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || Error::Parse(format!("bad complex number '{s}'"));
    let mut it = s.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| bad()));
    let re = it.next().ok_or_else(bad)??;
    let im = it.next().transpose()?.unwrap_or(0.0);
    if it.next().is_some() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SpectralText {
    Matrix(Vec<Vec<ComplexValue>>),
    Eigenvalues(Vec<ComplexValue>),
    Tagged(ribbonsum::io::SpectralInput),
}

/// A spectral argument: a comma list of real eigenvalues, inline JSON
/// (rows of a matrix, a list of eigenvalues, or `{"matrix"|"eigenvalues": …}`),
/// or a path to a file holding the JSON.
pub fn parse_spectral(s: &str) -> Result<SpectralMatrix<C64>> {
    let trimmed = s.trim();
    let looks_numeric = trimmed
        .chars()
        .all(|ch| ch.is_ascii_digit() || ".,-+eE ".contains(ch));
    if looks_numeric && !trimmed.is_empty() {
        let values = trimmed
            .split(',')
            .map(|t| t.trim().parse::<f64>().map(|x| C64::new(x, 0.0)))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::Parse(format!("bad eigenvalue list '{s}'")))?;
        return SpectralMatrix::from_eigenvalues(values);
    }
    let text = if trimmed.starts_with(['[', '{']) {
        trimmed.to_string()
    } else {
        std::fs::read_to_string(Path::new(trimmed))
            .map_err(|e| Error::Config(format!("cannot read {trimmed}: {e}")))?
    };
    let parsed: SpectralText = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("spectral input {trimmed}: {e}")))?;
    match parsed {
        SpectralText::Matrix(rows) => SpectralMatrix::from_matrix(matrix_from_json(&rows)?),
        SpectralText::Eigenvalues(v) => SpectralMatrix::from_eigenvalues(v.iter().map(|z| z.value()).collect()),
        SpectralText::Tagged(t) => t.resolve(),
    }
}

/// The `A, B` pair of a two-matrix integral. Missing sides fall back to the
/// built-in test pair at dimension `n` (2 when unset).
pub fn spectral_pair(
    a: Option<&str>,
    b: Option<&str>,
    n: Option<usize>,
) -> Result<(SpectralMatrix<C64>, SpectralMatrix<C64>)> {
    let fallback_dim = a
        .or(b)
        .map(parse_spectral)
        .transpose()?
        .map(|m| m.dim())
        .or(n)
        .unwrap_or(2);
    if fallback_dim == 0 || fallback_dim > 8 {
        return Err(Error::Config(format!("N = {fallback_dim} is outside 1..=8")));
    }
    let (ta, tb) = test_pair(fallback_dim);
    let pick = |arg: Option<&str>, default: CMatrix| match arg {
        Some(s) => parse_spectral(s),
        None if fallback_dim <= 3 => SpectralMatrix::from_matrix(default),
        None => Err(Error::Config("no built-in matrices above N = 3; pass --a and --b".into())),
    };
    let (a, b) = (pick(a, ta)?, pick(b, tb)?);
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("A is {0}x{0} but B is {1}x{1}", a.dim(), b.dim())));
    }
    if let Some(n) = n {
        if n != a.dim() {
            return Err(Error::Config(format!("--N {n} disagrees with {0}x{0} inputs", a.dim())));
        }
    }
    Ok((a, b))
}

pub fn matrix_pair(
    a: Option<&str>,
    b: Option<&str>,
    n: Option<usize>,
) -> Result<(CMatrix, CMatrix)> {
    let (a, b) = spectral_pair(a, b, n)?;
    Ok((as_matrix(&a), as_matrix(&b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partitions() {
        assert_eq!(parse_partition("2,1").unwrap().parts(), &[2, 1]);
        assert_eq!(parse_partition("(3 1 1)").unwrap().parts(), &[3, 1, 1]);
        assert!(parse_partition("").unwrap().is_empty());
        assert!(parse_partition("1,2").is_err());
        assert!(parse_partition("x").is_err());
    }

    #[test]
    fn spectral_forms() {
        assert_eq!(parse_spectral("0.5").unwrap().dim(), 1);
        assert_eq!(parse_spectral("0.5, -0.25").unwrap().dim(), 2);
        assert_eq!(parse_spectral("[[1, 0], [0, [0, 1]]]").unwrap().dim(), 2);
        assert_eq!(parse_spectral("{\"eigenvalues\": [[0.1, 0.2]]}").unwrap().dim(), 1);
        assert!(parse_spectral("[[1, 2]]").is_err());
    }

    #[test]
    fn complex_numbers() {
        assert_eq!(parse_complex("0.3").unwrap(), C64::new(0.3, 0.0));
        assert_eq!(parse_complex("0.3,-1").unwrap(), C64::new(0.3, -1.0));
        assert!(parse_complex("1,2,3").is_err());
    }

    #[test]
    fn couplings_and_conventions() {
        assert_eq!(parse_coupling("p-infinity").unwrap(), CouplingSpec::PInfinity);
        assert!(matches!(parse_coupling("{\"constant\": 2}").unwrap(), CouplingSpec::Constant(_)));
        assert!(parse_coupling("nonsense").is_err());
        assert_eq!(parse_convention("printed").unwrap(), WeightConvention::PRINTED);
        assert_eq!(parse_mode("face").unwrap(), CouplingMode::Face);
    }

    #[test]
    fn dimension_checks() {
        assert!(spectral_pair(Some("0.5"), Some("0.5, 0.1"), None).is_err());
        assert!(spectral_pair(Some("0.5"), None, Some(2)).is_err());
        assert_eq!(spectral_pair(None, None, Some(3)).unwrap().0.dim(), 3);
    }
}
