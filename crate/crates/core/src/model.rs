//! Corner matrices, dressing, and the character-expansion series.
//!
//! A model attaches one exponential of traces to every *coupled* monodromy
//! (the vertices in vertex mode, the faces in face mode) and integrates over
//! one group element per edge. Expanding each exponential by Cauchy–Littlewood
//! and integrating edge by edge leaves a single sum over partitions
//!
//! ```text
//! Z = Σ_λ w_G(λ) Π_a s_λ(c·p^(a)) Π_b s_λ(𝔙*_b)
//! ```
//!
//! where the `𝔙*_b` are the undressed products along the spectator words.
//! The normalization `w_G` and the coupling scale `c` are controlled by
//! [`WeightConvention`].

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{diagonal, matmul, CMatrix, C64};
use crate::partitions::{enumerate_partitions, shift_partition, Partition};
use crate::ribbon::{Label, MonodromyWord, RibbonGraph};
use crate::scalar::{rational_to_c64, Scalar};
use crate::symfun::{
    characteristic_coefficients, power_sums_of_matrix, scale_power_sums, schur_identity,
    schur_p_infinity, PowerSums, SchurEvaluator, SpectralMatrix,
};
use crate::Rational;

/// Determinants below this modulus count as singular in the BGW q-terms.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

/// Characteristic-polynomial coefficients closer than this are equal.
pub const SPECTRUM_TOLERANCE: f64 = 1e-9;
pub const DEFAULT_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    #[serde(rename = "u")]
    U,
    #[serde(rename = "su")]
    SU,
    /// `GL(N)` with the Gaussian weight `exp(-N |X_ij|²)`.
    #[serde(rename = "gl")]
    Gl,
}

impl std::str::FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u" => Ok(Group::U),
            "su" => Ok(Group::SU),
            "gl" => Ok(Group::Gl),
            other => Err(Error::Parse(format!("unknown group {other:?}; expected u, su or gl"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingMode {
    /// Exponentials on the vertex monodromies.
    #[default]
    Vertex,
    /// Exponentials on the face (dual vertex) monodromies.
    Face,
}

/// How the `N`-dependence of the series is booked.
///
/// * `unitary_n_power` multiplies the U(N)/SU(N) weight by `N^{-n|λ|}`. For
///   the Gaussian measure that factor comes from the entry variance `1/N` and
///   is always present.
/// * `scale_couplings` makes the integrand `exp(N Σ p_m Tr(𝔙^m)/m)` and the
///   series use `s_λ(N p)`; otherwise the integrand is `exp(Σ p_m Tr(𝔙^m)/m)`.
///
/// [`WeightConvention::CALIBRATED`] is the only setting whose loop-graph
/// series both reproduces the HCIZ series at `p_∞` and matches Monte Carlo
/// of its own integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightConvention {
    pub unitary_n_power: bool,
    pub scale_couplings: bool,
}

impl WeightConvention {
    /// `N^{-n|λ|} d^{-n}` with `s_λ(N p)`, for every group.
    pub const PRINTED: Self = WeightConvention { unitary_n_power: true, scale_couplings: true };
    pub const CALIBRATED: Self = WeightConvention { unitary_n_power: false, scale_couplings: false };

    pub const ALL: [Self; 4] = [
        Self::PRINTED,
        WeightConvention { unitary_n_power: true, scale_couplings: false },
        WeightConvention { unitary_n_power: false, scale_couplings: true },
        Self::CALIBRATED,
    ];

    /// The factor `c` in `exp(c Σ p_m Tr(Y^m)/m)`.
    pub fn coupling_scale(&self, n: usize) -> C64 {
        if self.scale_couplings {
            C64::new(n as f64, 0.0)
        } else {
            C64::new(1.0, 0.0)
        }
    }
}

impl Default for WeightConvention {
    fn default() -> Self {
        Self::CALIBRATED
    }
}

/// Series truncation: `|λ| ≤ max_weight`, `ℓ(λ) ≤ max_length` (default `N`),
/// and `|q| ≤ q_max` for determinant sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    pub max_weight: usize,
    #[serde(default)]
    pub max_length: Option<usize>,
    #[serde(default = "default_q_max")]
    pub q_max: usize,
}

fn default_q_max() -> usize {
    1
}

impl TruncationPolicy {
    pub fn new(max_weight: usize) -> Self {
        TruncationPolicy { max_weight, max_length: None, q_max: default_q_max() }
    }

    pub fn with_q_max(mut self, q_max: usize) -> Self {
        self.q_max = q_max;
        self
    }

    pub fn with_max_length(mut self, max_length: usize) -> Self {
        self.max_length = Some(max_length);
        self
    }

    fn length_for(&self, n: usize) -> usize {
        self.max_length.unwrap_or(n)
    }
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self::new(DEFAULT_ORDER)
    }
}

/// A partial sum graded by degree, with its total.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSum {
    shells: Vec<C64>,
    value: C64,
}

impl SeriesSum {
    pub fn from_shells(shells: Vec<C64>) -> Self {
        let value = shells.iter().fold(C64::new(0.0, 0.0), |acc, s| acc + s);
        SeriesSum { shells, value }
    }

    /// Adds parts in order; the total is the running sum of part totals.
    pub fn combine<'a>(parts: impl IntoIterator<Item = &'a SeriesSum>) -> Self {
        let mut shells: Vec<C64> = Vec::new();
        let mut value = C64::new(0.0, 0.0);
        for part in parts {
            if shells.len() < part.shells.len() {
                shells.resize(part.shells.len(), C64::new(0.0, 0.0));
            }
            for (s, t) in shells.iter_mut().zip(&part.shells) {
                *s += t;
            }
            value += part.value;
        }
        SeriesSum { shells, value }
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    /// Contribution of each degree, starting at degree 0.
    pub fn shells(&self) -> &[C64] {
        &self.shells
    }

    /// Size of the highest nonempty degree, a convergence hint.
    pub fn last_shell_magnitude(&self) -> f64 {
        self.shells.iter().rev().find(|s| s.norm() > 0.0).map_or(0.0, |s| s.norm())
    }
}

/// One `N × N` matrix per corner label.
#[derive(Debug, Clone, PartialEq)]
pub struct CornerAssignment {
    dim: usize,
    matrices: BTreeMap<Label, CMatrix>,
}

impl CornerAssignment {
    pub fn new(dim: usize, matrices: BTreeMap<Label, CMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("corner matrices need N >= 1".into()));
        }
        for (label, m) in &matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::Shape(format!(
                    "corner {label} is {}x{}, expected {dim}x{dim}",
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(CornerAssignment { dim, matrices })
    }

    /// All corners set to `I_N`.
    pub fn identity(dim: usize, graph: &RibbonGraph) -> Self {
        let matrices = graph.labels().map(|l| (l, CMatrix::identity(dim, dim))).collect();
        CornerAssignment { dim, matrices }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, label: Label) -> Result<&CMatrix> {
        self.matrices.get(&label).ok_or(Error::MissingLabel(label))
    }

    pub fn matrices(&self) -> &BTreeMap<Label, CMatrix> {
        &self.matrices
    }

    pub fn with(mut self, label: Label, m: CMatrix) -> Result<Self> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::Shape(format!("corner {label} has the wrong size")));
        }
        self.matrices.insert(label, m);
        Ok(self)
    }

    /// Checks that every label of `graph` has a matrix.
    pub fn covers(&self, graph: &RibbonGraph) -> Result<()> {
        match graph.labels().find(|l| !self.matrices.contains_key(l)) {
            Some(l) => Err(Error::MissingLabel(l)),
            None => Ok(()),
        }
    }
}

/// Group elements `X_i` on positive labels; `X_{-i}` is always `X_i†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dressing {
    matrices: BTreeMap<u32, CMatrix>,
}

impl Dressing {
    pub fn new(matrices: BTreeMap<u32, CMatrix>) -> Self {
        Dressing { matrices }
    }

    pub fn get(&self, label: Label) -> Result<CMatrix> {
        let m = self.matrices.get(&label.unsigned_abs()).ok_or(Error::MissingLabel(label))?;
        Ok(if label > 0 { m.clone() } else { m.adjoint() })
    }
}

/// `Π (X_i C_i)` along the word, or `Π C_i` without dressing.
pub fn monodromy_matrix(
    word: &[Label],
    corners: &CornerAssignment,
    dressing: Option<&Dressing>,
) -> Result<CMatrix> {
    let mut acc = CMatrix::identity(corners.dim, corners.dim);
    for &label in word {
        let c = corners.get(label)?;
        acc = match dressing {
            Some(d) => matmul(&matmul(&acc, &d.get(label)?), c),
            None => matmul(&acc, c),
        };
    }
    Ok(acc)
}

/// Everything needed to state one partition function.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub group: Group,
    pub graph: RibbonGraph,
    pub corners: CornerAssignment,
    /// One entry per coupled monodromy: per vertex in vertex mode, per face
    /// in face mode.
    pub couplings: Vec<PowerSums<C64>>,
    pub mode: CouplingMode,
    pub convention: WeightConvention,
}

impl ModelSpec {
    pub fn new(
        group: Group,
        graph: RibbonGraph,
        corners: CornerAssignment,
        couplings: Vec<PowerSums<C64>>,
        mode: CouplingMode,
        convention: WeightConvention,
    ) -> Result<Self> {
        corners.covers(&graph)?;
        let spec = ModelSpec { group, graph, corners, couplings, mode, convention };
        let slots = spec.coupled_words().len();
        if spec.couplings.len() != slots {
            return Err(Error::Config(format!(
                "{} couplings given, the graph has {slots} coupled monodromies",
                spec.couplings.len()
            )));
        }
        spec.check_su_scope()?;
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.corners.dim
    }

    /// The graph whose vertices carry the exponentials.
    pub fn coupled_graph(&self) -> RibbonGraph {
        match self.mode {
            CouplingMode::Vertex => self.graph.clone(),
            CouplingMode::Face => self.graph.dual(),
        }
    }

    pub fn coupled_words(&self) -> Vec<MonodromyWord> {
        match self.mode {
            CouplingMode::Vertex => self.graph.vertex_words(),
            CouplingMode::Face => self.graph.faces().to_vec(),
        }
    }

    pub fn spectator_words(&self) -> Vec<MonodromyWord> {
        match self.mode {
            CouplingMode::Vertex => self.graph.faces().to_vec(),
            CouplingMode::Face => self.graph.vertex_words(),
        }
    }

    /// Undressed monodromies that the series depends on.
    pub fn spectator_matrices(&self) -> Result<Vec<CMatrix>> {
        self.spectator_words()
            .iter()
            .map(|w| monodromy_matrix(w.labels(), &self.corners, None))
            .collect()
    }

    fn check_su_scope(&self) -> Result<()> {
        if self.group == Group::SU && self.coupled_words().len() != 1 {
            return Err(Error::Scope(format!(
                "SU(N) models need a single coupled monodromy (V = 1 in vertex mode), \
                 this graph has {}",
                self.coupled_words().len()
            )));
        }
        Ok(())
    }
}

/// `w_G(λ)` for a graph with `edges` edges.
pub fn series_weight(
    lambda: &Partition,
    group: Group,
    n: usize,
    edges: usize,
    convention: WeightConvention,
) -> Rational {
    let nn = <Rational as Scalar>::from_i64(n as i64);
    let n_power = || num_traits::pow(nn.clone(), edges * lambda.weight());
    let per_edge = match group {
        Group::U | Group::SU => {
            let d = schur_identity::<Rational>(lambda, n);
            if num_traits::Zero::is_zero(&d) {
                return <Rational as num_traits::Zero>::zero();
            }
            num_traits::pow(d, edges)
        }
        Group::Gl => num_traits::pow(schur_p_infinity::<Rational>(lambda), edges) * n_power(),
    };
    let mut w = <Rational as num_traits::One>::one() / per_edge;
    if convention.unitary_n_power && group != Group::Gl {
        w /= n_power();
    }
    w
}

fn evaluators(matrices: &[CMatrix], degree: usize) -> Result<Vec<SchurEvaluator<C64>>> {
    matrices
        .iter()
        .map(|m| {
            let y = SpectralMatrix::from_matrix(m.clone())?;
            Ok(SchurEvaluator::new(&power_sums_of_matrix(&y, degree.max(1))?))
        })
        .collect()
}

fn coupling_evaluators(spec: &ModelSpec, degree: usize) -> Result<Vec<SchurEvaluator<C64>>> {
    let c = spec.convention.coupling_scale(spec.dim());
    spec.couplings
        .iter()
        .map(|p| {
            if p.degree() < degree {
                return Err(Error::Degree { required: degree, available: p.degree() });
            }
            Ok(SchurEvaluator::new(&scale_power_sums(&p.with_degree(degree.max(1)), &c)))
        })
        .collect()
}

/// Graded sum over partitions in canonical order, evaluated in parallel and
/// reduced sequentially.
fn graded_sum<F>(partitions: &[Partition], degree: usize, term: F) -> Result<SeriesSum>
where
    F: Fn(&Partition) -> Result<C64> + Sync,
{
    let terms: Vec<Result<C64>> = partitions.par_iter().map(&term).collect();
    let mut shells = vec![C64::new(0.0, 0.0); degree + 1];
    for (lam, t) in partitions.iter().zip(terms) {
        shells[lam.weight()] += t?;
    }
    Ok(SeriesSum::from_shells(shells))
}

/// Truncated partition function of the model.
pub fn z_series(spec: &ModelSpec, trunc: &TruncationPolicy) -> Result<SeriesSum> {
    spec.check_su_scope()?;
    let n = spec.dim();
    let d = trunc.max_weight;
    let partitions = enumerate_partitions(d, trunc.length_for(n))?;
    let couplings = coupling_evaluators(spec, d)?;
    let spectators = evaluators(&spec.spectator_matrices()?, d)?;
    let edges = spec.graph.edges();
    graded_sum(&partitions, d, |lam| {
        let w = series_weight(lam, spec.group, n, edges, spec.convention);
        if num_traits::Zero::is_zero(&w) {
            return Ok(C64::new(0.0, 0.0));
        }
        let mut t = rational_to_c64(&w);
        for ev in couplings.iter().chain(&spectators) {
            t *= ev.schur(lam)?;
        }
        Ok(t)
    })
}

/// `∫ Π_a s_{λ^(a)}(𝔙_a(X)) dμ(X)` in closed form.
pub fn schur_moment(partitions: &[Partition], spec: &ModelSpec) -> Result<C64> {
    if spec.group == Group::SU {
        return Err(Error::Scope(
            "Schur moments are available for U(N) and Gaussian GL(N) only".into(),
        ));
    }
    let slots = spec.coupled_words().len();
    if partitions.len() != slots {
        return Err(Error::Config(format!(
            "{} partitions given for {slots} coupled monodromies",
            partitions.len()
        )));
    }
    let lam = &partitions[0];
    if partitions.iter().any(|p| p != lam) {
        return Ok(C64::new(0.0, 0.0));
    }
    let n = spec.dim();
    let convention = WeightConvention { scale_couplings: false, ..spec.convention };
    let w = series_weight(lam, spec.group, n, spec.graph.edges(), convention);
    let mut value = rational_to_c64(&w);
    for ev in evaluators(&spec.spectator_matrices()?, lam.weight())? {
        value *= ev.schur(lam)?;
    }
    Ok(value)
}

fn same_dimension(a: &SpectralMatrix<C64>, b: &SpectralMatrix<C64>) -> Result<usize> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!("A is {0}x{0} but B is {1}x{1}", a.dim(), b.dim())));
    }
    Ok(a.dim())
}

/// `Σ_{ℓ(λ)≤N} s_λ(A) s_λ(B) / (N)_λ`.
pub fn hciz_series(
    a: &SpectralMatrix<C64>,
    b: &SpectralMatrix<C64>,
    trunc: &TruncationPolicy,
) -> Result<SeriesSum> {
    let n = same_dimension(a, b)?;
    let d = trunc.max_weight;
    let partitions = enumerate_partitions(d, trunc.length_for(n).min(n))?;
    let ea = SchurEvaluator::new(&power_sums_of_matrix(a, d.max(1))?);
    let eb = SchurEvaluator::new(&power_sums_of_matrix(b, d.max(1))?);
    let nn = <Rational as Scalar>::from_i64(n as i64);
    graded_sum(&partitions, d, |lam| {
        let poch = crate::partitions::pochhammer(lam, &nn);
        Ok(ea.schur(lam)? * eb.schur(lam)? / rational_to_c64(&poch))
    })
}

/// Matrix form of a spectral argument; eigenvalue lists become diagonals.
pub fn as_matrix(y: &SpectralMatrix<C64>) -> CMatrix {
    match (y.explicit(), y.eigenvalues()) {
        (Some(m), _) => m.clone(),
        (None, Some(v)) => diagonal(v),
        (None, None) => unreachable!("a spectral matrix always has one form"),
    }
}

/// Per-`q` pieces of the BGW integral, `q = -q_max..=q_max`.
///
/// Both exponentials are truncated at degree `max_weight`, so the pair
/// `(λ, λ + |q|^N)` contributes only when both weights fit.
pub fn bgw_q_decomposition(
    a: &SpectralMatrix<C64>,
    b: &SpectralMatrix<C64>,
    beta: C64,
    q_max: usize,
    trunc: &TruncationPolicy,
) -> Result<Vec<(i64, SeriesSum)>> {
    let n = same_dimension(a, b)?;
    let det_a = a.determinant();
    let det_b = b.determinant();
    if q_max > 0 && (det_a.norm() < SINGULAR_THRESHOLD || det_b.norm() < SINGULAR_THRESHOLD) {
        return Err(Error::Singular(format!(
            "q-terms need invertible A and B (|det A| = {:.3e}, |det B| = {:.3e})",
            det_a.norm(),
            det_b.norm()
        )));
    }
    let d = trunc.max_weight;
    let ab = SpectralMatrix::from_matrix(matmul(&as_matrix(a), &as_matrix(b)))?;
    let eab = SchurEvaluator::new(&power_sums_of_matrix(&ab, d.max(1))?);
    let rows = trunc.length_for(n).min(n);

    let piece = |q: i64| -> Result<SeriesSum> {
        let shift = q.unsigned_abs() as usize;
        let budget = d.checked_sub(shift * n);
        let Some(budget) = budget else {
            return Ok(SeriesSum::from_shells(vec![C64::new(0.0, 0.0); 2 * d + 1]));
        };
        let det_factor = match q.signum() {
            1 => det_a.powi(-(shift as i32)),
            -1 => det_b.powi(-(shift as i32)),
            _ => C64::new(1.0, 0.0),
        };
        let partitions = enumerate_partitions(budget, rows)?;
        let terms: Vec<Result<(usize, C64)>> = partitions
            .par_iter()
            .map(|lam| {
                let big = shift_partition(lam, shift, n)?;
                let big = if shift == 0 { lam.clone() } else { big };
                let coeff = rational_to_c64(
                    &(schur_p_infinity::<Rational>(lam) * schur_p_infinity::<Rational>(&big)
                        / schur_identity::<Rational>(&big, n)),
                );
                let degree = lam.weight() + big.weight();
                let value = beta.powu(degree as u32) * coeff * eab.schur(&big)? * det_factor;
                Ok((degree, value))
            })
            .collect();
        let mut shells = vec![C64::new(0.0, 0.0); 2 * d + 1];
        for t in terms {
            let (deg, v) = t?;
            shells[deg] += v;
        }
        Ok(SeriesSum::from_shells(shells))
    };

    let q_max = q_max as i64;
    (-q_max..=q_max).map(|q| Ok((q, piece(q)?))).collect()
}

/// `∫ exp(β Tr(UA + U†B)) dU` over U(N) or SU(N), truncated.
pub fn bgw_series(
    a: &SpectralMatrix<C64>,
    b: &SpectralMatrix<C64>,
    beta: C64,
    group: Group,
    trunc: &TruncationPolicy,
) -> Result<SeriesSum> {
    let q_max = match group {
        Group::U => 0,
        Group::SU => trunc.q_max,
        Group::Gl => {
            return Err(Error::Scope("the BGW model is defined over U(N) and SU(N)".into()))
        }
    };
    let parts = bgw_q_decomposition(a, b, beta, q_max, trunc)?;
    Ok(SeriesSum::combine(parts.iter().map(|(_, s)| s)))
}

/// True iff every face monodromy has the same characteristic polynomial
/// under both assignments.
pub fn gauge_spectrum_check(
    first: &CornerAssignment,
    second: &CornerAssignment,
    graph: &RibbonGraph,
) -> bool {
    if first.dim != second.dim {
        return false;
    }
    graph.faces().iter().all(|face| {
        let coefficients = |c: &CornerAssignment| -> Option<Vec<C64>> {
            let m = monodromy_matrix(face.labels(), c, None).ok()?;
            characteristic_coefficients(&SpectralMatrix::from_matrix(m).ok()?).ok()
        };
        match (coefficients(first), coefficients(second)) {
            (Some(x), Some(y)) => {
                x.iter().zip(&y).all(|(u, v)| (u - v).norm() <= SPECTRUM_TOLERANCE)
            }
            _ => false,
        }
    })
}
