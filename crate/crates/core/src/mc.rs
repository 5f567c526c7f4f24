//! Monte Carlo oracle: Haar and Ginibre samplers, seeded streams, and
//! identity verification against the closed forms.
//!
//! Each sample `k` draws one matrix per positive edge label `i` from a stream
//! keyed by `(seed, i, k)`. Samples are accumulated in fixed-size chunks that
//! are folded in index order, so results are bit-identical for any thread
//! count.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{complex_pair, matrix_to_json};
use crate::linalg::{matmul, power_traces, CMatrix, C64};
use crate::model::{
    bgw_series, hciz_series, monodromy_matrix, schur_moment, z_series, Dressing, Group,
    ModelSpec, TruncationPolicy,
};
use crate::partitions::{shift_partition, Partition};
use crate::scalar::rational_to_c64;
use crate::symfun::{schur_identity, PowerSums, SchurEvaluator, SpectralMatrix};
use crate::Rational;

pub const MIN_SAMPLES: usize = 100;
/// Pass threshold in standard errors.
pub const Z_THRESHOLD: f64 = 4.0;
/// Below this standard error the comparison is absolute.
pub const DEGENERATE_STD_ERROR: f64 = 1e-12;
pub const ABSOLUTE_TOLERANCE: f64 = 1e-9;

const CHUNK: usize = 4096;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Independent random stream for `(seed, label, index)`.
pub fn stream(seed: u64, label: u64, index: u64) -> ChaCha8Rng {
    let key = splitmix(splitmix(splitmix(seed) ^ label) ^ index);
    let mut bytes = [0u8; 32];
    let mut state = key;
    for chunk in bytes.chunks_mut(8) {
        state = splitmix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Haar unitary from the QR factorization of a complex Gaussian matrix,
/// with the column phases fixed by the diagonal of `R`.
pub fn sample_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    assert!(n >= 1, "N must be positive");
    loop {
        let z = DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng, 1.0));
        let qr = z.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)].norm() < 1e-300) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            let phase = r[(j, j)] / r[(j, j)].norm();
            for i in 0..n {
                q[(i, j)] *= phase;
            }
        }
        return q;
    }
}

/// Haar element of SU(N): a U(N) draw with its determinant phase removed
/// on the principal branch.
pub fn sample_special_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    remove_determinant_phase(sample_unitary(n, rng), 0)
}

/// `U · exp(-i (arg det U + 2πk) / N)`.
pub fn remove_determinant_phase(u: CMatrix, branch: i64) -> CMatrix {
    let n = u.nrows();
    let arg = u.determinant().arg() + 2.0 * std::f64::consts::PI * branch as f64;
    let phase = C64::from_polar(1.0, -arg / n as f64);
    u * phase
}

/// Complex Ginibre matrix with `E|X_ij|² = 1/N`.
pub fn sample_ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    assert!(n >= 1, "N must be positive");
    let variance = 1.0 / n as f64;
    DMatrix::from_fn(n, n, |_, _| complex_gaussian(rng, variance))
}

pub fn sample_group<R: Rng + ?Sized>(group: Group, n: usize, rng: &mut R) -> CMatrix {
    match group {
        Group::U => sample_unitary(n, rng),
        Group::SU => sample_special_unitary(n, rng),
        Group::Gl => sample_ginibre(n, rng),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: C64,
    /// Larger of the real and imaginary standard errors.
    pub std_error: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct Moments {
    count: usize,
    sum: C64,
    re2: f64,
    im2: f64,
}

impl Moments {
    fn zero() -> Self {
        Moments { count: 0, sum: C64::new(0.0, 0.0), re2: 0.0, im2: 0.0 }
    }

    fn push(&mut self, d: C64) {
        self.count += 1;
        self.sum += d;
        self.re2 += d.re * d.re;
        self.im2 += d.im * d.im;
    }

    fn merge(&mut self, other: &Moments) {
        self.count += other.count;
        self.sum += other.sum;
        self.re2 += other.re2;
        self.im2 += other.im2;
    }

    fn finish(&self, shift: C64, seed: u64) -> MCEstimate {
        let m = self.count as f64;
        let mean = self.sum / m;
        let var = |s2: f64, mu: f64| ((s2 / m - mu * mu) * m / (m - 1.0)).max(0.0);
        let se = var(self.re2, mean.re).sqrt().max(var(self.im2, mean.im).sqrt()) / m.sqrt();
        MCEstimate { mean: mean + shift, std_error: se, samples: self.count, seed }
    }
}

/// Group elements for sample `index`, one per label in `labels`.
pub fn draw(group: Group, n: usize, labels: &[u32], seed: u64, index: u64) -> Vec<CMatrix> {
    labels
        .iter()
        .map(|&l| sample_group(group, n, &mut stream(seed, u64::from(l), index)))
        .collect()
}

/// Estimates several integrands from shared draws.
///
/// `integrand` receives the draws for one sample (ordered as `labels`) and
/// returns one value per integrand; the output length must not vary.
pub fn estimate_batch<F>(
    group: Group,
    n: usize,
    labels: &[u32],
    samples: usize,
    seed: u64,
    integrand: F,
) -> Result<Vec<MCEstimate>>
where
    F: Fn(&[CMatrix]) -> Result<Vec<C64>> + Sync,
{
    if samples < MIN_SAMPLES {
        return Err(Error::Config(format!("need at least {MIN_SAMPLES} samples, got {samples}")));
    }
    let eval = |k: usize| integrand(&draw(group, n, labels, seed, k as u64));
    let shift = eval(0)?;
    let width = shift.len();
    let chunks: Vec<Result<Vec<Moments>>> = (0..samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![Moments::zero(); width];
            for k in c * CHUNK..((c + 1) * CHUNK).min(samples) {
                let values = eval(k)?;
                if values.len() != width {
                    return Err(Error::Evaluation("integrand changed its output width".into()));
                }
                for ((a, v), s) in acc.iter_mut().zip(values).zip(&shift) {
                    a.push(v - s);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = vec![Moments::zero(); width];
    for chunk in chunks {
        for (t, c) in total.iter_mut().zip(chunk?) {
            t.merge(&c);
        }
    }
    Ok(total.iter().zip(&shift).map(|(t, &s)| t.finish(s, seed)).collect())
}

/// Degree-`≤ degree` truncation of `exp(Σ_m g_m Tr(Y^m) / m)`, as a sum of
/// graded pieces `f_k = (1/k) Σ_m g_m Tr(Y^m) f_{k-m}`.
pub fn truncated_exp_trace(g: &PowerSums<C64>, traces: &[C64], degree: usize) -> C64 {
    let mut f = vec![C64::new(1.0, 0.0)];
    for k in 1..=degree {
        let mut s = C64::new(0.0, 0.0);
        for m in 1..=k {
            s += g.get(m) * traces[m - 1] * f[k - m];
        }
        f.push(s / k as f64);
    }
    f.iter().sum()
}

/// Degree-`≤ degree` truncation of `exp(x)`.
pub fn truncated_exp(x: C64, degree: usize) -> C64 {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..=degree {
        term *= x / k as f64;
        sum += term;
    }
    sum
}

fn schur_of(lambda: &Partition, m: &CMatrix) -> Result<C64> {
    let traces = power_traces(m, lambda.weight().max(1));
    SchurEvaluator::new(&PowerSums::new(traces)?).schur(lambda)
}

/// One left-hand side together with its closed form.
#[derive(Debug, Clone)]
pub enum IdentityCase {
    /// `∫_U s_λ(UA) s_μ(U†B)`.
    Orth2a { lambda: Partition, mu: Partition, a: CMatrix, b: CMatrix },
    /// `∫_U s_λ(UA) s_μ(U†B) det U^q`, `q > 0`.
    Orth2b { lambda: Partition, mu: Partition, q: i64, a: CMatrix, b: CMatrix },
    /// `∫_U s_λ(UA) s_μ(U†B) det U^q`, `q < 0`.
    Orth2c { lambda: Partition, mu: Partition, q: i64, a: CMatrix, b: CMatrix },
    /// `∫_U s_λ(UAU†B) det U^q`.
    Orth2Prime { lambda: Partition, q: i64, a: CMatrix, b: CMatrix },
    /// `∫_G s_λ(UA) s_μ(U†B)` over U(N) or SU(N).
    Su3bc { group: Group, lambda: Partition, mu: Partition, a: CMatrix, b: CMatrix },
    /// `∫_SU s_λ(UA) s_λ(U†B)`.
    Su4 { lambda: Partition, a: CMatrix, b: CMatrix },
    /// `∫ Π_a s_{λ^(a)}(𝔙_a(X))`.
    SchurMoment { model: ModelSpec, partitions: Vec<Partition> },
    /// The model integrand with each exponential truncated at the series degree.
    ZIntegral { model: ModelSpec, truncation: Option<TruncationPolicy> },
    /// `∫_G exp(Tr(UAU†B))`.
    Hciz { group: Group, a: CMatrix, b: CMatrix, truncation: Option<TruncationPolicy> },
    /// `∫_G exp(β Tr(UA)) exp(β Tr(U†B))`.
    Bgw { group: Group, a: CMatrix, b: CMatrix, beta: C64, truncation: Option<TruncationPolicy> },
}

pub const IDENTITY_IDS: [&str; 10] = [
    "orth-2a",
    "orth-2b",
    "orth-2c",
    "orth-2prime",
    "su-3bc",
    "su-4",
    "schur-moment",
    "z-integral",
    "hciz",
    "bgw",
];

fn det_power(m: &CMatrix, q: i64) -> C64 {
    m.determinant().powi(q as i32)
}

fn need(trunc: &Option<TruncationPolicy>) -> Result<TruncationPolicy> {
    trunc.ok_or_else(|| Error::Config("this integrand needs a truncation degree".into()))
}

fn orthogonality(lambda: &Partition, mu: &Partition, a: &CMatrix, b: &CMatrix) -> Result<C64> {
    if lambda != mu {
        return Ok(C64::new(0.0, 0.0));
    }
    let n = a.nrows();
    let d = schur_identity::<Rational>(lambda, n);
    if num_traits::Zero::is_zero(&d) {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(schur_of(lambda, &matmul(a, b))? / rational_to_c64(&d))
}

impl IdentityCase {
    pub fn id(&self) -> &'static str {
        match self {
            IdentityCase::Orth2a { .. } => "orth-2a",
            IdentityCase::Orth2b { .. } => "orth-2b",
            IdentityCase::Orth2c { .. } => "orth-2c",
            IdentityCase::Orth2Prime { .. } => "orth-2prime",
            IdentityCase::Su3bc { .. } => "su-3bc",
            IdentityCase::Su4 { .. } => "su-4",
            IdentityCase::SchurMoment { .. } => "schur-moment",
            IdentityCase::ZIntegral { .. } => "z-integral",
            IdentityCase::Hciz { .. } => "hciz",
            IdentityCase::Bgw { .. } => "bgw",
        }
    }

    pub fn group(&self) -> Group {
        match self {
            IdentityCase::Orth2a { .. }
            | IdentityCase::Orth2b { .. }
            | IdentityCase::Orth2c { .. }
            | IdentityCase::Orth2Prime { .. } => Group::U,
            IdentityCase::Su4 { .. } => Group::SU,
            IdentityCase::Su3bc { group, .. }
            | IdentityCase::Hciz { group, .. }
            | IdentityCase::Bgw { group, .. } => *group,
            IdentityCase::SchurMoment { model, .. } | IdentityCase::ZIntegral { model, .. } => {
                model.group
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            IdentityCase::Orth2a { a, .. }
            | IdentityCase::Orth2b { a, .. }
            | IdentityCase::Orth2c { a, .. }
            | IdentityCase::Orth2Prime { a, .. }
            | IdentityCase::Su3bc { a, .. }
            | IdentityCase::Su4 { a, .. }
            | IdentityCase::Hciz { a, .. }
            | IdentityCase::Bgw { a, .. } => a.nrows(),
            IdentityCase::SchurMoment { model, .. } | IdentityCase::ZIntegral { model, .. } => {
                model.dim()
            }
        }
    }

    /// Positive labels that receive a group element.
    pub fn labels(&self) -> Vec<u32> {
        match self {
            IdentityCase::SchurMoment { model, .. } | IdentityCase::ZIntegral { model, .. } => {
                (1..=model.graph.edges() as u32).collect()
            }
            _ => vec![1],
        }
    }

    fn check(&self) -> Result<()> {
        let square = |a: &CMatrix, b: &CMatrix| {
            if a.nrows() != a.ncols() || b.nrows() != b.ncols() || a.nrows() != b.nrows() {
                Err(Error::Shape("A and B must be square of the same size".into()))
            } else if a.nrows() == 0 {
                Err(Error::Shape("matrices must be at least 1x1".into()))
            } else {
                Ok(())
            }
        };
        match self {
            IdentityCase::Orth2a { a, b, .. }
            | IdentityCase::Orth2Prime { a, b, .. }
            | IdentityCase::Su4 { a, b, .. } => square(a, b),
            IdentityCase::Orth2b { a, b, q, .. } => {
                square(a, b)?;
                if *q <= 0 {
                    return Err(Error::Config("orth-2b needs q > 0".into()));
                }
                Ok(())
            }
            IdentityCase::Orth2c { a, b, q, .. } => {
                square(a, b)?;
                if *q >= 0 {
                    return Err(Error::Config("orth-2c needs q < 0".into()));
                }
                Ok(())
            }
            IdentityCase::Su3bc { group, a, b, .. } => {
                square(a, b)?;
                if *group == Group::Gl {
                    return Err(Error::Scope("su-3bc compares U(N) and SU(N) only".into()));
                }
                Ok(())
            }
            IdentityCase::Hciz { group, a, b, truncation } => {
                square(a, b)?;
                need(truncation)?;
                if *group == Group::Gl {
                    return Err(Error::Scope("the HCIZ integral is over U(N) or SU(N)".into()));
                }
                Ok(())
            }
            IdentityCase::Bgw { a, b, truncation, .. } => {
                square(a, b)?;
                need(truncation).map(|_| ())
            }
            IdentityCase::SchurMoment { .. } => Ok(()),
            IdentityCase::ZIntegral { truncation, .. } => need(truncation).map(|_| ()),
        }
    }

    /// The integrand at one set of group elements.
    pub fn integrand(&self, x: &[CMatrix]) -> Result<C64> {
        let u = &x[0];
        match self {
            IdentityCase::Orth2a { lambda, mu, a, b }
            | IdentityCase::Su3bc { lambda, mu, a, b, .. } => {
                Ok(schur_of(lambda, &matmul(u, a))? * schur_of(mu, &matmul(&u.adjoint(), b))?)
            }
            IdentityCase::Orth2b { lambda, mu, q, a, b }
            | IdentityCase::Orth2c { lambda, mu, q, a, b } => {
                Ok(schur_of(lambda, &matmul(u, a))?
                    * schur_of(mu, &matmul(&u.adjoint(), b))?
                    * det_power(u, *q))
            }
            IdentityCase::Orth2Prime { lambda, q, a, b } => {
                let y = matmul(&matmul(&matmul(u, a), &u.adjoint()), b);
                Ok(schur_of(lambda, &y)? * det_power(u, *q))
            }
            IdentityCase::Su4 { lambda, a, b } => {
                Ok(schur_of(lambda, &matmul(u, a))? * schur_of(lambda, &matmul(&u.adjoint(), b))?)
            }
            IdentityCase::SchurMoment { model, partitions } => {
                let dressing = dressing_of(x);
                let mut value = C64::new(1.0, 0.0);
                for (word, lam) in model.coupled_words().iter().zip(partitions) {
                    let m = monodromy_matrix(word.labels(), &model.corners, Some(&dressing))?;
                    value *= schur_of(lam, &m)?;
                }
                Ok(value)
            }
            IdentityCase::ZIntegral { model, truncation } => {
                let d = need(truncation)?.max_weight;
                let dressing = dressing_of(x);
                let c = model.convention.coupling_scale(model.dim());
                let mut value = C64::new(1.0, 0.0);
                for (word, p) in model.coupled_words().iter().zip(&model.couplings) {
                    if p.degree() < d {
                        return Err(Error::Degree { required: d, available: p.degree() });
                    }
                    let m = monodromy_matrix(word.labels(), &model.corners, Some(&dressing))?;
                    let g = crate::symfun::scale_power_sums(p, &c);
                    value *= truncated_exp_trace(&g, &power_traces(&m, d), d);
                }
                Ok(value)
            }
            IdentityCase::Hciz { a, b, truncation, .. } => {
                let y = matmul(&matmul(&matmul(u, a), &u.adjoint()), b);
                Ok(truncated_exp(y.trace(), need(truncation)?.max_weight))
            }
            IdentityCase::Bgw { a, b, beta, truncation, .. } => {
                let d = need(truncation)?.max_weight;
                Ok(truncated_exp(*beta * matmul(u, a).trace(), d)
                    * truncated_exp(*beta * matmul(&u.adjoint(), b).trace(), d))
            }
        }
    }

    /// The right-hand side.
    pub fn closed_form(&self) -> Result<C64> {
        self.check()?;
        match self {
            IdentityCase::Orth2a { lambda, mu, a, b } => orthogonality(lambda, mu, a, b),
            IdentityCase::Orth2b { lambda, mu, q, a, b } => {
                let n = a.nrows();
                if lambda.length() > n || mu.length() > n {
                    return Ok(C64::new(0.0, 0.0));
                }
                if *mu != shift_partition(lambda, *q as usize, n)? {
                    return Ok(C64::new(0.0, 0.0));
                }
                Ok(orthogonality(mu, mu, a, b)? * det_power(a, -q))
            }
            IdentityCase::Orth2c { lambda, mu, q, a, b } => {
                let n = a.nrows();
                if lambda.length() > n || mu.length() > n {
                    return Ok(C64::new(0.0, 0.0));
                }
                if *lambda != shift_partition(mu, q.unsigned_abs() as usize, n)? {
                    return Ok(C64::new(0.0, 0.0));
                }
                Ok(orthogonality(lambda, lambda, a, b)? * det_power(b, *q))
            }
            IdentityCase::Orth2Prime { lambda, q, a, b } => {
                if *q != 0 {
                    return Ok(C64::new(0.0, 0.0));
                }
                let n = a.nrows();
                let d = schur_identity::<Rational>(lambda, n);
                if num_traits::Zero::is_zero(&d) {
                    return Ok(C64::new(0.0, 0.0));
                }
                Ok(schur_of(lambda, a)? * schur_of(lambda, b)? / rational_to_c64(&d))
            }
            IdentityCase::Su3bc { group, lambda, mu, a, b } => {
                let mut value = orthogonality(lambda, mu, a, b)?;
                if *group == Group::SU {
                    let n = a.nrows();
                    let gap = mu.weight() as i64 - lambda.weight() as i64;
                    let fits = lambda.length() <= n && mu.length() <= n;
                    if fits && gap != 0 && gap % n as i64 == 0 {
                        let q = gap / n as i64;
                        if q > 0 && *mu == shift_partition(lambda, q as usize, n)? {
                            value += orthogonality(mu, mu, a, b)? * det_power(a, -q);
                        }
                        if q < 0 && *lambda == shift_partition(mu, q.unsigned_abs() as usize, n)? {
                            value += orthogonality(lambda, lambda, a, b)? * det_power(b, q);
                        }
                    }
                }
                Ok(value)
            }
            IdentityCase::Su4 { lambda, a, b } => orthogonality(lambda, lambda, a, b),
            IdentityCase::SchurMoment { model, partitions } => schur_moment(partitions, model),
            IdentityCase::ZIntegral { model, truncation } => {
                Ok(z_series(model, &need(truncation)?)?.value())
            }
            IdentityCase::Hciz { a, b, truncation, .. } => {
                let sa = SpectralMatrix::from_matrix(a.clone())?;
                let sb = SpectralMatrix::from_matrix(b.clone())?;
                Ok(hciz_series(&sa, &sb, &need(truncation)?)?.value())
            }
            IdentityCase::Bgw { group, a, b, beta, truncation } => {
                let sa = SpectralMatrix::from_matrix(a.clone())?;
                let sb = SpectralMatrix::from_matrix(b.clone())?;
                Ok(bgw_series(&sa, &sb, *beta, *group, &need(truncation)?)?.value())
            }
        }
    }

    pub fn params(&self) -> Value {
        let trunc = |t: &Option<TruncationPolicy>| json!(t);
        let group = self.group();
        let n = self.dim();
        match self {
            IdentityCase::Orth2a { lambda, mu, a, b } => json!({
                "N": n, "group": group, "lambda": lambda, "mu": mu,
                "A": matrix_to_json(a), "B": matrix_to_json(b)
            }),
            IdentityCase::Orth2b { lambda, mu, q, a, b }
            | IdentityCase::Orth2c { lambda, mu, q, a, b } => json!({
                "N": n, "group": group, "lambda": lambda, "mu": mu, "q": q,
                "A": matrix_to_json(a), "B": matrix_to_json(b)
            }),
            IdentityCase::Orth2Prime { lambda, q, a, b } => json!({
                "N": n, "group": group, "lambda": lambda, "q": q,
                "A": matrix_to_json(a), "B": matrix_to_json(b)
            }),
            IdentityCase::Su3bc { lambda, mu, a, b, .. } => json!({
                "N": n, "group": group, "lambda": lambda, "mu": mu,
                "A": matrix_to_json(a), "B": matrix_to_json(b)
            }),
            IdentityCase::Su4 { lambda, a, b } => json!({
                "N": n, "group": group, "lambda": lambda,
                "A": matrix_to_json(a), "B": matrix_to_json(b)
            }),
            IdentityCase::SchurMoment { model, partitions } => json!({
                "N": n, "group": group, "graph": model.graph.to_file(),
                "partitions": partitions, "convention": model.convention,
            }),
            IdentityCase::ZIntegral { model, truncation } => json!({
                "N": n, "group": group, "graph": model.graph.to_file(),
                "mode": model.mode, "convention": model.convention,
                "couplings": model.couplings.iter()
                    .map(|p| p.values().iter().map(|z| complex_pair(*z)).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
                "truncation": trunc(truncation),
            }),
            IdentityCase::Hciz { a, b, truncation, .. } => json!({
                "N": n, "group": group, "A": matrix_to_json(a), "B": matrix_to_json(b),
                "truncation": trunc(truncation),
            }),
            IdentityCase::Bgw { a, b, beta, truncation, .. } => json!({
                "N": n, "group": group, "A": matrix_to_json(a), "B": matrix_to_json(b),
                "beta": complex_pair(*beta), "truncation": trunc(truncation),
            }),
        }
    }
}

fn dressing_of(x: &[CMatrix]) -> Dressing {
    Dressing::new(x.iter().enumerate().map(|(i, m)| (i as u32 + 1, m.clone())).collect::<BTreeMap<_, _>>())
}

/// Monte Carlo estimate of the left-hand side.
pub fn estimate(case: &IdentityCase, samples: usize, seed: u64) -> Result<MCEstimate> {
    Ok(estimate_cases(std::slice::from_ref(case), samples, seed)?.remove(0))
}

/// Estimates cases sharing a group, dimension and label set from one set of draws.
pub fn estimate_cases(cases: &[IdentityCase], samples: usize, seed: u64) -> Result<Vec<MCEstimate>> {
    let Some(first) = cases.first() else {
        return Ok(Vec::new());
    };
    let (group, n, labels) = (first.group(), first.dim(), first.labels());
    for c in cases {
        c.check()?;
        if c.group() != group || c.dim() != n || c.labels() != labels {
            return Err(Error::Config("batched cases must share group, N and labels".into()));
        }
    }
    estimate_batch(group, n, &labels, samples, seed, |x| {
        cases.iter().map(|c| c.integrand(x)).collect()
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSection {
    pub mean: [f64; 2],
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Outcome of comparing an estimate with its closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub case: String,
    pub params: Value,
    pub mc: McSection,
    pub closed: [f64; 2],
    /// `None` when the estimate has (numerically) zero variance.
    pub z: Option<f64>,
    pub abs_diff: f64,
    pub mode: &'static str,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(case: &IdentityCase, estimate: MCEstimate, closed: C64) -> Self {
        let abs_diff = (estimate.mean - closed).norm();
        let (z, mode, pass) = if estimate.std_error < DEGENERATE_STD_ERROR {
            (None, "absolute", abs_diff <= ABSOLUTE_TOLERANCE)
        } else {
            let z = abs_diff / estimate.std_error;
            (Some(z), "z-score", z <= Z_THRESHOLD)
        };
        VerificationReport {
            case: case.id().to_string(),
            params: case.params(),
            mc: McSection {
                mean: complex_pair(estimate.mean),
                stderr: estimate.std_error,
                samples: estimate.samples,
                seed: estimate.seed,
            },
            closed: complex_pair(closed),
            z,
            abs_diff,
            mode,
            pass,
        }
    }
}

pub fn verify(case: &IdentityCase, samples: usize, seed: u64) -> Result<VerificationReport> {
    Ok(verify_cases(std::slice::from_ref(case), samples, seed)?.remove(0))
}

pub fn verify_cases(
    cases: &[IdentityCase],
    samples: usize,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let closed = cases.iter().map(|c| c.closed_form()).collect::<Result<Vec<_>>>()?;
    let estimates = estimate_cases(cases, samples, seed)?;
    Ok(cases
        .iter()
        .zip(estimates)
        .zip(closed)
        .map(|((c, e), v)| VerificationReport::new(c, e, v))
        .collect())
}

/// Two estimates agree within `Z_THRESHOLD` combined standard errors.
pub fn estimates_agree(x: &MCEstimate, y: &MCEstimate) -> bool {
    let se = x.std_error.hypot(y.std_error);
    let diff = (x.mean - y.mean).norm();
    if se < DEGENERATE_STD_ERROR {
        diff <= ABSOLUTE_TOLERANCE
    } else {
        diff / se <= Z_THRESHOLD
    }
}
