//! Hypergeometric tau functions `Σ_λ s_λ(p) s_λ(Y) Π r(j - i)`, the
//! reduction of planar models to that form, and a finite-difference KP check.
//!
//! KP times are `t_m = p_m / m`. The residual is evaluated for
//! `u = 2 ∂²_{t1} log τ` in the form
//! `∂_x(4 u_t - 6 u u_x - u_xxx) - 3 u_yy` with `x = t1, y = t2, t = t3`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{Group, ModelSpec, SeriesSum, TruncationPolicy};
use crate::partitions::{content_product, enumerate_partitions, CellContentWeight};
use crate::symfun::{power_sums_of_matrix, PowerSums, SchurEvaluator, SpectralMatrix};

/// Default finite-difference step in KP time.
pub const DEFAULT_STEP: f64 = 0.2;
/// Largest allowed relative size of the top shell at the base point.
pub const SHELL_TOLERANCE: f64 = 1e-10;
pub const MIN_KP_DEGREE: usize = 8;

#[derive(Debug, Clone)]
pub struct HypTauSpec {
    pub couplings: PowerSums<C64>,
    pub spectrum: SpectralMatrix<C64>,
    pub weight: CellContentWeight<C64>,
    pub truncation: TruncationPolicy,
}

impl HypTauSpec {
    pub fn new(
        couplings: PowerSums<C64>,
        spectrum: SpectralMatrix<C64>,
        weight: CellContentWeight<C64>,
        truncation: TruncationPolicy,
    ) -> Result<Self> {
        if truncation.max_weight < 1 {
            return Err(Error::Config("tau series need truncation degree >= 1".into()));
        }
        Ok(HypTauSpec { couplings, spectrum, weight, truncation })
    }

    /// The same series with `p` replaced.
    pub fn at(&self, couplings: PowerSums<C64>) -> Self {
        HypTauSpec { couplings, ..self.clone() }
    }
}

/// Graded partial sums of the tau series.
pub fn hyp_tau_series(spec: &HypTauSpec) -> Result<SeriesSum> {
    let d = spec.truncation.max_weight;
    let n = spec.spectrum.dim();
    let rows = spec.truncation.max_length.unwrap_or(n).min(n);
    if spec.couplings.degree() < d {
        return Err(Error::Degree { required: d, available: spec.couplings.degree() });
    }
    let ep = SchurEvaluator::new(&spec.couplings.with_degree(d));
    let ey = SchurEvaluator::new(&power_sums_of_matrix(&spec.spectrum, d)?);
    let mut shells = vec![C64::new(0.0, 0.0); d + 1];
    for lam in enumerate_partitions(d, rows)? {
        let r = content_product(&lam, &spec.weight);
        if r == C64::new(0.0, 0.0) {
            continue;
        }
        shells[lam.weight()] += ep.schur(&lam)? * ey.schur(&lam)? * r;
    }
    Ok(SeriesSum::from_shells(shells))
}

pub fn hyp_tau(spec: &HypTauSpec) -> Result<C64> {
    Ok(hyp_tau_series(spec)?.value())
}

/// `r(m) = Π (a_k + m) / Π (b_k + m)`, with tabulated values taking
/// precedence at listed contents.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RationalWeight {
    #[serde(default)]
    pub num_shifts: Vec<f64>,
    #[serde(default)]
    pub den_shifts: Vec<f64>,
    #[serde(default)]
    pub overrides: BTreeMap<i64, f64>,
}

impl RationalWeight {
    pub fn eval(&self, m: i64) -> Option<f64> {
        if let Some(&v) = self.overrides.get(&m) {
            return Some(v);
        }
        let m = m as f64;
        let den: f64 = self.den_shifts.iter().map(|b| b + m).product();
        if den == 0.0 {
            return None;
        }
        Some(self.num_shifts.iter().map(|a| a + m).product::<f64>() / den)
    }

    /// Content weight for partitions with at most `max_weight` cells in at
    /// most `max_rows` rows; fails if a reachable content hits a pole.
    pub fn to_weight(&self, max_weight: usize, max_rows: usize) -> Result<CellContentWeight<C64>> {
        let lowest = 1 - max_rows.min(max_weight).max(1) as i64;
        let highest = max_weight as i64 - 1;
        if let Some(m) = (lowest..=highest).find(|&m| self.eval(m).is_none()) {
            return Err(Error::Domain(format!("r has a pole at content {m} and no override")));
        }
        let table = self.clone();
        Ok(CellContentWeight::new(move |m| C64::new(table.eval(m).unwrap_or(f64::NAN), 0.0)))
    }
}

/// One slot of the model fixed to a content-product form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Directive {
    /// Coupling `slot` is the constant sequence `p_m = u`.
    Coupling { slot: usize, u: C64 },
    /// Spectator monodromy `face` has the spectrum of `I[units]`:
    /// `units` ones and `N - units` zeros.
    Face { face: usize, units: usize },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpecializationPlan {
    pub directives: Vec<Directive>,
}

impl SpecializationPlan {
    pub fn new(directives: Vec<Directive>) -> Self {
        SpecializationPlan { directives }
    }

    pub fn validate(&self, model: &ModelSpec) -> Result<()> {
        let g = &model.graph;
        if g.euler_characteristic() != 2 {
            return Err(Error::Plan(format!(
                "the graph has V - n + F = {}, specialization needs 2",
                g.euler_characteristic()
            )));
        }
        let want = g.edges() - 1;
        if self.directives.len() != want {
            return Err(Error::Plan(format!(
                "{} directives given, a graph with {} edges needs {want}",
                self.directives.len(),
                g.edges()
            )));
        }
        let couplings = model.couplings.len();
        let faces = model.spectator_words().len();
        let mut seen = std::collections::BTreeSet::new();
        for d in &self.directives {
            let (key, ok) = match *d {
                Directive::Coupling { slot, .. } => ((0, slot), slot < couplings),
                Directive::Face { face, units } => {
                    ((1, face), face < faces && units <= model.dim())
                }
            };
            if !ok {
                return Err(Error::Plan(format!("directive {d:?} is out of range")));
            }
            if !seen.insert(key) {
                return Err(Error::Plan(format!("directive {d:?} repeats a slot")));
            }
        }
        Ok(())
    }
}

/// Content form of the coupling, if it has one.
fn content_form(p: &PowerSums<C64>) -> Option<C64> {
    let first = p.get(1);
    let constant = p.values().iter().all(|v| *v == first);
    if constant {
        return Some(first);
    }
    None
}

enum Factor {
    /// `(x + m) / (N + m)`
    Shifted(C64),
    /// `x / (N + m)`
    Scaled(C64),
}

/// Rewrites the model as a hypergeometric tau function.
///
/// Directives replace the corresponding couplings or spectator spectra.
/// Couplings of the form `c·p_∞` or `p(u)` are then absorbed into the weight
/// in order until two free slots remain; those become `p` and the spectrum.
pub fn apply_specialization(plan: &SpecializationPlan, model: &ModelSpec) -> Result<HypTauSpec> {
    plan.validate(model)?;
    let n = model.dim();
    let nf = n as f64;
    let edges = model.graph.edges() as i32;
    let scale = model.convention.coupling_scale(n);
    let mut factors: Vec<Factor> = Vec::new();
    let mut fixed_couplings = std::collections::BTreeSet::new();
    let mut fixed_faces = std::collections::BTreeSet::new();
    for d in &plan.directives {
        match *d {
            Directive::Coupling { slot, u } => {
                fixed_couplings.insert(slot);
                factors.push(Factor::Shifted(scale * u));
            }
            Directive::Face { face, units } => {
                fixed_faces.insert(face);
                factors.push(Factor::Shifted(C64::new(units as f64, 0.0)));
            }
        }
    }

    let mut free_couplings: Vec<usize> =
        (0..model.couplings.len()).filter(|a| !fixed_couplings.contains(a)).collect();
    let free_faces: Vec<usize> =
        (0..model.spectator_words().len()).filter(|b| !fixed_faces.contains(b)).collect();
    while free_couplings.len() + free_faces.len() > 2 {
        let Some(pos) = free_couplings.iter().position(|&a| {
            let p = &model.couplings[a];
            p.as_p1_only().is_some() || content_form(p).is_some()
        }) else {
            return Err(Error::Plan(
                "more than two slots stay free and no coupling has a content form".into(),
            ));
        };
        let a = free_couplings.remove(pos);
        let p = &model.couplings[a];
        factors.push(match p.as_p1_only() {
            Some(c) => Factor::Scaled(scale * c),
            None => Factor::Shifted(scale * p.get(1)),
        });
    }

    let spectators = model.spectator_matrices()?;
    let d = model.couplings.iter().map(|p| p.degree()).min().unwrap_or(1);
    let spectral = |b: usize| SpectralMatrix::from_matrix(spectators[b].clone());
    let (couplings, spectrum) = match (free_couplings.as_slice(), free_faces.as_slice()) {
        ([a], [b]) => (crate::symfun::scale_power_sums(&model.couplings[*a], &scale), spectral(*b)?),
        ([], [b1, b2]) => (power_sums_of_matrix(&spectral(*b1)?, d.max(1))?, spectral(*b2)?),
        _ => {
            return Err(Error::Plan(
                "the two free slots must include a spectator monodromy".into(),
            ))
        }
    };

    let n_power = match model.group {
        Group::Gl => true,
        Group::U | Group::SU => model.convention.unitary_n_power,
    };
    let gl = model.group == Group::Gl;
    let weight = CellContentWeight::new(move |m| {
        let m = m as f64;
        let mut w = C64::new(1.0, 0.0);
        if gl {
            w *= ((nf + m) / nf).powi(edges);
        } else if n_power {
            w /= nf.powi(edges);
        }
        for f in &factors {
            w *= match f {
                Factor::Shifted(x) => (x + m) / (nf + m),
                Factor::Scaled(x) => x / (nf + m),
            };
        }
        w
    });
    let truncation = TruncationPolicy { max_length: None, ..TruncationPolicy::new(d) };
    HypTauSpec::new(couplings, spectrum, weight, truncation)
}

/// `log τ` as `log τ_0 + log(1 + x)` with `x` the higher shells over `τ_0`,
/// which keeps full precision when `τ` is close to `τ_0`.
fn log_of_series(series: &SeriesSum) -> C64 {
    let shells = series.shells();
    let head = shells[0];
    if head.norm() == 0.0 {
        return series.value().ln();
    }
    let x = shells[1..].iter().sum::<C64>() / head;
    let modulus = 0.5 * (2.0 * x.re + x.norm_sqr()).ln_1p();
    head.ln() + C64::new(modulus, x.im.atan2(1.0 + x.re))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KpResidual {
    pub absolute: f64,
    /// Largest single term of the equation at the base point.
    pub scale: f64,
    pub relative: f64,
}

/// KP residual of the hypergeometric series around `base` (a point in
/// `p`-space; missing entries are zero).
pub fn kp_residual(spec: &HypTauSpec, base: &PowerSums<C64>, step: f64) -> Result<KpResidual> {
    if spec.truncation.max_weight < MIN_KP_DEGREE {
        return Err(Error::Config(format!(
            "KP checks need truncation degree >= {MIN_KP_DEGREE}"
        )));
    }
    let d = spec.truncation.max_weight;
    kp_residual_with(|p| hyp_tau_series(&spec.at(p.clone())), base, step, d)
}

/// KP residual of an arbitrary series `tau(p)` truncated at `degree`.
pub fn kp_residual_with<F>(tau: F, base: &PowerSums<C64>, step: f64, degree: usize) -> Result<KpResidual>
where
    F: Fn(&PowerSums<C64>) -> Result<SeriesSum> + Sync,
{
    if step.is_nan() || step <= 0.0 {
        return Err(Error::Config("finite-difference step must be positive".into()));
    }
    let base = if base.degree() < degree { base.with_degree(degree) } else { base.clone() };
    let at_base = tau(&base)?;
    let top = at_base.last_shell_magnitude();
    let size = at_base.value().norm();
    if at_base.shells().last().map_or(0.0, |s| s.norm()) > SHELL_TOLERANCE * size {
        return Err(Error::Domain(format!(
            "top shell {top:.3e} is not below {SHELL_TOLERANCE:e} of |tau| = {size:.3e}; \
             move the base point closer to 0 or raise the degree"
        )));
    }

    // offsets (x, y, t) in units of `step` needed by the u-stencil below
    let mut u_points: Vec<(i32, i32, i32)> = (-2..=2).map(|x| (x, 0, 0)).collect();
    u_points.extend([(1, 0, 1), (1, 0, -1), (-1, 0, 1), (-1, 0, -1), (0, 1, 0), (0, -1, 0)]);
    let mut f_points: Vec<(i32, i32, i32)> = Vec::new();
    for &(x, y, t) in &u_points {
        for dx in -1..=1 {
            let p = (x + dx, y, t);
            if !f_points.contains(&p) {
                f_points.push(p);
            }
        }
    }
    let values: Vec<Result<C64>> = f_points
        .par_iter()
        .map(|&(x, y, t)| {
            let mut v = base.values().to_vec();
            v[0] += C64::new(x as f64 * step, 0.0);
            v[1] += C64::new(2.0 * y as f64 * step, 0.0);
            v[2] += C64::new(3.0 * t as f64 * step, 0.0);
            let series = tau(&PowerSums::new(v)?)?;
            if series.value().norm() < 1e-300 {
                return Err(Error::Evaluation(format!(
                    "tau vanishes at stencil node {:?}",
                    (x, y, t)
                )));
            }
            Ok(log_of_series(&series))
        })
        .collect();
    let mut log_tau: HashMap<(i32, i32, i32), C64> = HashMap::new();
    for (p, v) in f_points.into_iter().zip(values) {
        log_tau.insert(p, v?);
    }
    let h2 = step * step;
    let u = |x: i32, y: i32, t: i32| {
        2.0 * (log_tau[&(x + 1, y, t)] - 2.0 * log_tau[&(x, y, t)] + log_tau[&(x - 1, y, t)]) / h2
    };
    let u0 = u(0, 0, 0);
    let u_x = (u(1, 0, 0) - u(-1, 0, 0)) / (2.0 * step);
    let u_xx = (u(1, 0, 0) - 2.0 * u0 + u(-1, 0, 0)) / h2;
    let u_xxxx =
        (u(2, 0, 0) - 4.0 * u(1, 0, 0) + 6.0 * u0 - 4.0 * u(-1, 0, 0) + u(-2, 0, 0)) / (h2 * h2);
    let u_xt = (u(1, 0, 1) - u(1, 0, -1) - u(-1, 0, 1) + u(-1, 0, -1)) / (4.0 * h2);
    let u_yy = (u(0, 1, 0) - 2.0 * u0 + u(0, -1, 0)) / h2;

    let terms = [4.0 * u_xt, -6.0 * u_x * u_x, -6.0 * u0 * u_xx, -u_xxxx, -3.0 * u_yy];
    let absolute = terms.iter().sum::<C64>().norm();
    let scale = terms.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let relative = if scale > 0.0 { absolute / scale } else { 0.0 };
    Ok(KpResidual { absolute, scale, relative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{real_diagonal, CMatrix};
    use crate::model::{hciz_series, z_series, CornerAssignment, CouplingMode, WeightConvention};
    use crate::partitions::Partition;
    use crate::ribbon::RibbonGraph;
    use crate::symfun::schur_from_power_sums;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn eigen(v: &[f64]) -> SpectralMatrix<C64> {
        SpectralMatrix::from_eigenvalues(v.iter().map(|&x| c(x)).collect()).unwrap()
    }

    fn ps(v: &[f64], degree: usize) -> PowerSums<C64> {
        PowerSums::new(v.iter().map(|&x| c(x)).collect()).unwrap().with_degree(degree)
    }

    #[test]
    fn single_eigenvalue_gives_exponential() {
        let d = 12;
        let p = ps(&[0.3, -0.2, 0.1, 0.05], d);
        let x = 0.4;
        let spec = HypTauSpec::new(p.clone(), eigen(&[x]), CellContentWeight::constant(c(1.0)), TruncationPolicy::new(d)).unwrap();
        let got = hyp_tau(&spec).unwrap();
        let exponent: C64 = (1..=d).map(|m| p.get(m) * x.powi(m as i32) / m as f64).sum();
        assert!((got - exponent.exp()).norm() < 1e-9);
        let zero = spec.at(PowerSums::zero(d));
        assert_eq!(hyp_tau(&zero).unwrap(), c(1.0));
    }

    #[test]
    fn pochhammer_weight_is_hciz() {
        let n = 2;
        let a = crate::linalg::square_from_rows(vec![
            vec![c(0.3), C64::new(0.0, 0.1)],
            vec![c(0.1), c(-0.2)],
        ])
        .unwrap();
        let sa = SpectralMatrix::from_matrix(a).unwrap();
        let sb = eigen(&[0.25, 0.1]);
        let d = 8;
        let spec = HypTauSpec::new(
            power_sums_of_matrix(&sa, d).unwrap(),
            sb.clone(),
            CellContentWeight::new(move |m| c(1.0 / (n as f64 + m as f64))),
            TruncationPolicy::new(d),
        )
        .unwrap();
        let h = hciz_series(&sa, &sb, &TruncationPolicy::new(d)).unwrap();
        let t = hyp_tau_series(&spec).unwrap();
        for (x, y) in t.shells().iter().zip(h.shells()) {
            assert!((x - y).norm() < 1e-15);
        }
    }

    #[test]
    fn cauchy_symmetry() {
        let d = 7;
        let a = eigen(&[0.3, -0.1, 0.2]);
        let b = eigen(&[0.4, 0.15, -0.05]);
        let w = CellContentWeight::new(|m| c(1.0 / (3.0 + m as f64)));
        let fwd = HypTauSpec::new(power_sums_of_matrix(&a, d).unwrap(), b.clone(), w.clone(), TruncationPolicy::new(d)).unwrap();
        let rev = HypTauSpec::new(power_sums_of_matrix(&b, d).unwrap(), a, w, TruncationPolicy::new(d)).unwrap();
        assert!((hyp_tau(&fwd).unwrap() - hyp_tau(&rev).unwrap()).norm() < 1e-10);
    }

    #[test]
    fn rational_weights() {
        let r = RationalWeight { num_shifts: vec![1.0], den_shifts: vec![3.0], overrides: BTreeMap::new() };
        assert_eq!(r.eval(1), Some(0.5));
        assert!(r.to_weight(10, 3).is_ok());
        assert!(matches!(r.to_weight(10, 4), Err(Error::Domain(_))));
        let patched = RationalWeight { overrides: BTreeMap::from([(-3, 0.0)]), ..r };
        let w = patched.to_weight(5, 5).unwrap();
        assert_eq!(w.eval(-3), c(0.0));
        let parsed: RationalWeight =
            serde_json::from_str(r#"{"num_shifts": [1], "den_shifts": [3]}"#).unwrap();
        assert_eq!(parsed.eval(0), Some(1.0 / 3.0));
    }

    #[test]
    fn vanishing_weights_drop_terms() {
        // r(m) = m + 1 kills every partition with a cell of content -1
        let d = 6;
        let w = CellContentWeight::new(|m| c(1.0 + m as f64));
        let spec = HypTauSpec::new(ps(&[0.2, 0.1], d), eigen(&[0.3, 0.2]), w, TruncationPolicy::new(d)).unwrap();
        let t = hyp_tau(&spec).unwrap();
        let mut single_rows = C64::new(0.0, 0.0);
        for k in 0..=d {
            let lam = Partition::new(vec![k]).unwrap();
            let r: f64 = (1..=k).map(|j| j as f64).product();
            single_rows += schur_from_power_sums(&lam, &spec.couplings).unwrap()
                * crate::symfun::schur_of_matrix(&lam, &spec.spectrum).unwrap()
                * r;
        }
        assert!((t - single_rows).norm() < 1e-14);
    }

    fn loop_model(n: usize) -> ModelSpec {
        let a = real_diagonal(&(0..n).map(|i| 0.3 - 0.1 * i as f64).collect::<Vec<_>>());
        let mut b = CMatrix::identity(n, n) * c(0.2);
        b[(0, n - 1)] += C64::new(0.05, 0.05);
        ModelSpec::new(
            Group::U,
            RibbonGraph::loop_graph(),
            CornerAssignment::new(n, BTreeMap::from([(1, a), (-1, b)])).unwrap(),
            vec![PowerSums::p_infinity(8)],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
        .unwrap()
    }

    #[test]
    fn loop_graph_reduces_to_pochhammer() {
        let model = loop_model(3);
        let spec = apply_specialization(&SpecializationPlan::default(), &model).unwrap();
        for m in -2..=3 {
            assert!((spec.weight.eval(m) - c(1.0 / (3.0 + m as f64))).norm() < 1e-15);
        }
        let t = TruncationPolicy::new(8);
        assert!((hyp_tau(&spec).unwrap() - z_series(&model, &t).unwrap().value()).norm() < 1e-9);
    }

    #[test]
    fn figure_eight_with_one_face_fixed() {
        let graph = RibbonGraph::new(2, vec![vec![1, -1, 2, -2]]).unwrap();
        assert_eq!(graph.euler_characteristic(), 2);
        let n = 3;
        let faces = graph.faces().to_vec();
        let target = 1;
        let units = 2;
        let mut corners = BTreeMap::new();
        let generic = [
            real_diagonal(&[0.3, 0.2, 0.1]),
            crate::linalg::square_from_rows(vec![
                vec![c(0.2), c(0.05), c(0.0)],
                vec![c(0.0), c(0.1), C64::new(0.0, 0.1)],
                vec![c(0.1), c(0.0), c(0.3)],
            ])
            .unwrap(),
            real_diagonal(&[0.5, -0.2, 0.4]),
            real_diagonal(&[0.9, 1.1, 0.8]),
        ];
        let mut gi = generic.iter().cycle();
        for (b, face) in faces.iter().enumerate() {
            for (k, &l) in face.labels().iter().enumerate() {
                let m = if b == target {
                    if k == 0 {
                        real_diagonal(&[1.0, 1.0, 0.0])
                    } else {
                        CMatrix::identity(n, n)
                    }
                } else {
                    gi.next().unwrap().clone()
                };
                corners.insert(l, m);
            }
        }
        let model = ModelSpec::new(
            Group::U,
            graph,
            CornerAssignment::new(n, corners).unwrap(),
            vec![PowerSums::p_infinity(8)],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
        .unwrap();
        let plan = SpecializationPlan::new(vec![Directive::Face { face: target, units }]);
        let spec = apply_specialization(&plan, &model).unwrap();
        let z = z_series(&model, &TruncationPolicy::new(8)).unwrap().value();
        assert!((hyp_tau(&spec).unwrap() - z).norm() < 1e-9, "{} vs {z}", hyp_tau(&spec).unwrap());
    }

    #[test]
    fn digon_with_one_coupling_fixed() {
        let graph = RibbonGraph::new(2, vec![vec![1, 2], vec![-1, -2]]).unwrap();
        assert_eq!(graph.euler_characteristic(), 2);
        let n = 2;
        let u = 1.5;
        let mats = [
            real_diagonal(&[0.3, 0.2]),
            real_diagonal(&[0.5, -0.1]),
            crate::linalg::square_from_rows(vec![vec![c(0.2), c(0.1)], vec![c(0.0), c(0.4)]]).unwrap(),
            real_diagonal(&[0.7, 0.6]),
        ];
        let corners = CornerAssignment::new(n, graph.labels().zip(mats).collect()).unwrap();
        let model = ModelSpec::new(
            Group::U,
            graph,
            corners,
            vec![PowerSums::constant(c(u), 8), PowerSums::p_infinity(8)],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
        .unwrap();
        let plan = SpecializationPlan::new(vec![Directive::Coupling { slot: 0, u: c(u) }]);
        let spec = apply_specialization(&plan, &model).unwrap();
        let z = z_series(&model, &TruncationPolicy::new(8)).unwrap().value();
        assert!((hyp_tau(&spec).unwrap() - z).norm() < 1e-9);
    }

    #[test]
    fn u_equal_to_n_is_neutral() {
        let graph = RibbonGraph::segment();
        let n = 2;
        let corners = CornerAssignment::new(
            n,
            BTreeMap::from([(1, real_diagonal(&[0.3, 0.1])), (-1, real_diagonal(&[0.2, 0.5]))]),
        )
        .unwrap();
        let model = ModelSpec::new(
            Group::U,
            graph,
            corners,
            vec![PowerSums::constant(c(2.0), 6), PowerSums::p_infinity(6)],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
        .unwrap();
        let spec = apply_specialization(&SpecializationPlan::default(), &model).unwrap();
        // u = N absorbed: r(m) = (2 + m)/(2 + m) = 1 times the p_∞ slot left free
        for m in -1..=4 {
            assert!((spec.weight.eval(m) - c(1.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn plan_errors() {
        let torus = ModelSpec::new(
            Group::U,
            RibbonGraph::torus(),
            CornerAssignment::identity(2, &RibbonGraph::torus()),
            vec![PowerSums::p_infinity(4)],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
        .unwrap();
        let plan = SpecializationPlan::new(vec![Directive::Face { face: 0, units: 1 }]);
        assert!(matches!(apply_specialization(&plan, &torus), Err(Error::Plan(_))));
        let lp = loop_model(2);
        assert!(matches!(apply_specialization(&plan, &lp), Err(Error::Plan(_))));
    }

    fn hypergeometric_spec(d: usize) -> HypTauSpec {
        HypTauSpec::new(
            PowerSums::zero(d),
            eigen(&[0.3, 0.2, 0.1]),
            CellContentWeight::new(|m| c(1.0 / (3.0 + m as f64))),
            TruncationPolicy::new(d),
        )
        .unwrap()
    }

    #[test]
    fn kp_exponential_case() {
        let d = 14;
        let spec = HypTauSpec::new(PowerSums::zero(d), eigen(&[0.3]), CellContentWeight::constant(c(1.0)), TruncationPolicy::new(d)).unwrap();
        let base = ps(&[0.03, -0.04, 0.03], d);
        let r = kp_residual(&spec, &base, DEFAULT_STEP).unwrap();
        assert!(r.absolute <= 1e-8, "{r:?}");
    }

    #[test]
    fn kp_hypergeometric_case_and_control() {
        let d = 10;
        let spec = hypergeometric_spec(d);
        let base = ps(&[0.03, -0.04, 0.03], d);
        let good = kp_residual(&spec, &base, DEFAULT_STEP).unwrap();
        assert!(good.relative <= 1e-4, "{good:?}");

        let bad_lambda = Partition::new(vec![1, 1]).unwrap();
        let ey = crate::symfun::schur_of_matrix(&bad_lambda, &spec.spectrum).unwrap();
        let r11 = content_product(&bad_lambda, &spec.weight);
        let corrupted = kp_residual_with(
            |p| {
                let s = hyp_tau_series(&spec.at(p.clone()))?;
                let extra = 0.5 * schur_from_power_sums(&bad_lambda, p)? * ey * r11;
                let mut shells = s.shells().to_vec();
                shells[2] += extra;
                Ok(SeriesSum::from_shells(shells))
            },
            &base,
            DEFAULT_STEP,
            d,
        )
        .unwrap();
        assert!(corrupted.relative >= 10.0 * 1e-4, "{corrupted:?}");
    }

    #[test]
    fn kp_preconditions() {
        let spec = hypergeometric_spec(6);
        assert!(matches!(kp_residual(&spec, &PowerSums::zero(6), 0.2), Err(Error::Config(_))));
        let spec = hypergeometric_spec(10);
        assert!(matches!(kp_residual(&spec, &PowerSums::zero(10), 0.0), Err(Error::Config(_))));
        let far = ps(&[3.0, 2.0, 1.0], 10);
        assert!(matches!(kp_residual(&spec, &far, 0.2), Err(Error::Domain(_))));
    }
}
