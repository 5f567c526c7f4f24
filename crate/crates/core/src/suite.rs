//! The acceptance battery: ten end-to-end checks with runtime budgets.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::linalg::{matmul, power_traces, square_from_rows, CMatrix, C64};
use crate::mc::{
    estimate_batch, estimates_agree, sample_unitary, truncated_exp_trace, verify_cases,
    IdentityCase, VerificationReport,
};
use crate::model::{
    bgw_q_decomposition, bgw_series, gauge_spectrum_check, hciz_series, z_series,
    CornerAssignment, CouplingMode, Group, ModelSpec, SeriesSum, TruncationPolicy,
    WeightConvention,
};
use crate::partitions::{content_product, enumerate_partitions, Partition};
use crate::ribbon::{Label, RibbonGraph};
use crate::symfun::{
    power_sums_of_matrix, schur_content_value, schur_from_power_sums, PowerSums,
    SchurEvaluator, SpectralMatrix,
};
use crate::tau::{
    hyp_tau_series, kp_residual, kp_residual_with, HypTauSpec, RationalWeight, DEFAULT_STEP,
};
use crate::Rational;

pub const SAMPLES: usize = 200_000;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {} ({:.2}s of {}s): {}",
            self.id,
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(&str, u64, Check); 10] = [
    ("exact Schur cross-check", 10, exact_schur),
    ("Cauchy-Littlewood truncation", 5, cauchy_littlewood),
    ("orthogonality oracle", 300, orthogonality),
    ("SU(N) determinant terms", 120, su_q_terms),
    ("HCIZ series", 300, hciz),
    ("weight convention calibration", 60, calibration),
    ("graph duality", 5, duality),
    ("gauge invariance", 30, gauge),
    ("KP residual", 60, kp),
    ("BGW scalar closure", 10, bgw_scalar),
];

pub fn run_criterion(id: usize) -> Outcome {
    let (name, budget, check) = CRITERIA[id - 1];
    let start = Instant::now();
    let result = check();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget);
    let (ok, mut detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = elapsed < budget;
    if !in_time {
        detail.push_str("; over the runtime budget");
    }
    Outcome { id, name, pass: ok && in_time, detail, elapsed, budget }
}

pub fn run_all() -> Vec<Outcome> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn matrix(rows: &[&[(f64, f64)]]) -> CMatrix {
    square_from_rows(rows.iter().map(|r| r.iter().map(|&(x, y)| c(x, y)).collect()).collect())
        .expect("square literal")
}

/// Fixed generic test matrices: non-normal, complex, invertible.
pub fn test_pair(n: usize) -> (CMatrix, CMatrix) {
    match n {
        1 => (matrix(&[&[(0.6, 0.1)]]), matrix(&[&[(0.5, -0.2)]])),
        2 => (
            matrix(&[&[(0.6, 0.2), (0.3, 0.0)], &[(-0.2, 0.0), (0.5, -0.1)]]),
            matrix(&[&[(0.4, 0.0), (0.0, 0.1)], &[(0.25, 0.0), (0.7, 0.0)]]),
        ),
        _ => (
            matrix(&[
                &[(0.5, 0.0), (0.2, 0.0), (0.0, 0.0)],
                &[(0.0, 0.1), (0.6, 0.0), (-0.2, 0.0)],
                &[(0.0, 0.0), (0.3, 0.0), (0.4, 0.1)],
            ]),
            matrix(&[
                &[(0.7, 0.0), (0.0, 0.0), (0.1, -0.1)],
                &[(0.2, 0.0), (0.3, 0.2), (0.0, 0.0)],
                &[(0.0, 0.0), (-0.1, 0.0), (0.5, 0.0)],
            ]),
        ),
    }
}

/// Non-normal matrix with prescribed eigenvalues, `S diag(e) S⁻¹`.
fn with_spectrum(eigs: &[C64], rng: &mut ChaCha8Rng) -> CMatrix {
    let n = eigs.len();
    let s = CMatrix::from_fn(n, n, |i, j| {
        let base = if i == j { 1.0 } else { 0.0 };
        c(base + rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3))
    });
    let inv = s.clone().try_inverse().expect("well-conditioned by construction");
    &s * crate::linalg::diagonal(eigs) * inv
}

fn random_disk(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU))
}

fn exact_schur() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let us: Vec<Rational> = (0..20)
        .map(|_| {
            let num: i64 = rng.random_range(-40..=40);
            let den: i64 = rng.random_range(1..=12);
            <Rational as crate::Scalar>::from_ratio(num, den)
        })
        .collect();
    let mut checked = 0;
    let mut bad = Vec::new();
    for n in 1..=4 {
        for lam in enumerate_partitions(6, n)? {
            for u in &us {
                let p = PowerSums::constant(u.clone(), lam.weight().max(1));
                if schur_from_power_sums(&lam, &p)? != schur_content_value(&lam, u, n) {
                    bad.push(format!("{lam} N={n} u={}", crate::scalar::format_rational(u)));
                }
                checked += 1;
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} exact comparisons, {} mismatches {bad:?}", bad.len())))
}

fn cauchy_littlewood() -> Result<(bool, String)> {
    let (d, n) = (8, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let partitions = enumerate_partitions(d, d)?;
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = PowerSums::new((0..d).map(|_| random_disk(&mut rng, 0.5)).collect())?;
        let eigs: Vec<C64> = (0..n).map(|_| random_disk(&mut rng, 0.5)).collect();
        let y = with_spectrum(&eigs, &mut rng);
        let direct = truncated_exp_trace(&p, &power_traces(&y, d), d);
        let ep = SchurEvaluator::new(&p);
        let ey = SchurEvaluator::new(&power_sums_of_matrix(&SpectralMatrix::from_matrix(y)?, d)?);
        let mut series = C64::new(0.0, 0.0);
        for lam in &partitions {
            series += ep.schur(lam)? * ey.schur(lam)?;
        }
        worst = worst.max((series - direct).norm() / direct.norm());
    }
    Ok((worst <= 1e-12, format!("worst relative error {worst:.2e} over 20 draws (D=8, N=3)")))
}

#[derive(Clone, Copy)]
enum OrthTerm {
    Pair(usize, usize, i64),
    Conjugated(usize, i64),
}

fn orthogonality_reports(n: usize, seed: u64) -> Result<Vec<VerificationReport>> {
    let (a, b) = test_pair(n);
    let lams = enumerate_partitions(3, 3)?;
    let mut terms = Vec::new();
    let mut cases = Vec::new();
    for (i, lam) in lams.iter().enumerate() {
        for (j, mu) in lams.iter().enumerate() {
            terms.push(OrthTerm::Pair(i, j, 0));
            cases.push(IdentityCase::Orth2a { lambda: lam.clone(), mu: mu.clone(), a: a.clone(), b: b.clone() });
            terms.push(OrthTerm::Pair(i, j, 1));
            cases.push(IdentityCase::Orth2b { lambda: lam.clone(), mu: mu.clone(), q: 1, a: a.clone(), b: b.clone() });
            terms.push(OrthTerm::Pair(i, j, -1));
            cases.push(IdentityCase::Orth2c { lambda: lam.clone(), mu: mu.clone(), q: -1, a: a.clone(), b: b.clone() });
        }
        for q in -1..=1 {
            terms.push(OrthTerm::Conjugated(i, q));
            cases.push(IdentityCase::Orth2Prime { lambda: lam.clone(), q, a: a.clone(), b: b.clone() });
        }
    }
    let closed = cases.iter().map(|c| c.closed_form()).collect::<Result<Vec<_>>>()?;
    // one Schur table per draw, shared by every term
    let estimates = estimate_batch(Group::U, n, &[1], SAMPLES, seed, |x| {
        let u = &x[0];
        let ua = matmul(u, &a);
        let ub = matmul(&u.adjoint(), &b);
        let conj = matmul(&matmul(&ua, &u.adjoint()), &b);
        let table = |m: &CMatrix| -> Result<Vec<C64>> {
            let ev = SchurEvaluator::new(&PowerSums::new(power_traces(m, 3))?);
            lams.iter().map(|l| ev.schur(l)).collect()
        };
        let (sa, sb, sc) = (table(&ua)?, table(&ub)?, table(&conj)?);
        let det = u.determinant();
        let det_pow = |q: i64| det.powi(q as i32);
        Ok(terms
            .iter()
            .map(|t| match *t {
                OrthTerm::Pair(i, j, q) => sa[i] * sb[j] * det_pow(q),
                OrthTerm::Conjugated(i, q) => sc[i] * det_pow(q),
            })
            .collect())
    })?;
    let mut reports: Vec<VerificationReport> = cases
        .iter()
        .zip(estimates)
        .zip(closed)
        .map(|((case, e), v)| VerificationReport::new(case, e, v))
        .collect();

    let su4: Vec<IdentityCase> = lams
        .iter()
        .map(|l| IdentityCase::Su4 { lambda: l.clone(), a: a.clone(), b: b.clone() })
        .collect();
    reports.extend(verify_cases(&su4, SAMPLES, seed + 1)?);
    Ok(reports)
}

fn orthogonality() -> Result<(bool, String)> {
    let mut total = 0;
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut degenerate = false;
    for n in [2, 3] {
        for r in orthogonality_reports(n, 100 + n as u64)? {
            total += 1;
            worst = worst.max(r.z.unwrap_or(0.0));
            if r.case == "su-4" && n == 2 && r.params["lambda"] == serde_json::json!([1, 1]) {
                degenerate = r.mode == "absolute" && r.pass;
            }
            if !r.pass {
                failures.push(format!("{} N={n} {}", r.case, r.params["lambda"]));
            }
        }
    }
    Ok((
        failures.is_empty() && degenerate,
        format!(
            "{total} cases, worst z {worst:.2}, zero-variance (1,1) case {}, failures {failures:?}",
            if degenerate { "exact" } else { "NOT exact" }
        ),
    ))
}

fn su_q_terms() -> Result<(bool, String)> {
    let n = 2;
    let (a, b) = test_pair(n);
    let lam = Partition::new(vec![1, 1])?;
    let case = |group| IdentityCase::Su3bc {
        group,
        lambda: lam.clone(),
        mu: Partition::empty(),
        a: a.clone(),
        b: b.clone(),
    };
    let su = &verify_cases(&[case(Group::SU)], SAMPLES, 41)?[0];
    let u = &verify_cases(&[case(Group::U)], SAMPLES, 42)?[0];
    let det_a = a.determinant();
    let su_value_ok = (C64::new(su.closed[0], su.closed[1]) - det_a).norm() < 1e-14;
    let u_value_ok = su.pass && u.pass && u.closed == [0.0, 0.0];

    let beta = c(1.0, 0.0);
    let trunc = TruncationPolicy::new(3);
    let bgw = IdentityCase::Bgw { group: Group::SU, a: a.clone(), b: b.clone(), beta, truncation: Some(trunc) };
    let est = crate::mc::estimate(&bgw, SAMPLES, 43)?;
    let sa = SpectralMatrix::from_matrix(a)?;
    let sb = SpectralMatrix::from_matrix(b)?;
    let without = bgw_series(&sa, &sb, beta, Group::SU, &trunc.with_q_max(0))?.value();
    let with = bgw_series(&sa, &sb, beta, Group::SU, &trunc.with_q_max(1))?.value();
    let z_without = (est.mean - without).norm() / est.std_error;
    let z_with = (est.mean - with).norm() / est.std_error;
    let pass = su_value_ok && u_value_ok && z_without >= 8.0 && z_with <= 4.0;
    Ok((
        pass,
        format!(
            "SU(2) gives det A ({} mode, diff {:.1e}), U(2) gives 0 (z {:.2}); \
             BGW over SU(2): q_max=0 off by {z_without:.1} sigma, q_max=1 within {z_with:.2} sigma",
            su.mode,
            su.abs_diff,
            u.z.unwrap_or(0.0)
        ),
    ))
}

fn hciz() -> Result<(bool, String)> {
    let (a, b) = (0.5, 0.5);
    let one = SpectralMatrix::from_eigenvalues(vec![c(a, 0.0)])?;
    let other = SpectralMatrix::from_eigenvalues(vec![c(b, 0.0)])?;
    let scalar = hciz_series(&one, &other, &TruncationPolicy::new(20))?.value();
    let scalar_err = (scalar - c((a * b).exp(), 0.0)).norm();
    let mut ok = scalar_err <= 1e-10;
    let mut notes = vec![format!("N=1 error {scalar_err:.1e}")];

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [2, 3] {
        let pairs = if n == 2 {
            vec![
                (crate::linalg::real_diagonal(&[0.3, 0.1]), crate::linalg::real_diagonal(&[0.2, 0.4])),
                spectral_pair(n, &mut rng),
            ]
        } else {
            vec![spectral_pair(n, &mut rng), spectral_pair(n, &mut rng)]
        };
        for (k, (a, b)) in pairs.into_iter().enumerate() {
            let trunc = Some(TruncationPolicy::new(10));
            let mut estimates = Vec::new();
            for (g, group) in [Group::U, Group::SU].into_iter().enumerate() {
                let case = IdentityCase::Hciz { group, a: a.clone(), b: b.clone(), truncation: trunc };
                let seed = 500 + 10 * n as u64 + 2 * k as u64 + g as u64;
                let r = &verify_cases(std::slice::from_ref(&case), SAMPLES, seed)?[0];
                ok &= r.pass;
                notes.push(format!("N={n}#{k} {group:?} z={:.2}", r.z.unwrap_or(0.0)));
                estimates.push(crate::mc::estimate(&case, SAMPLES, seed)?);
            }
            let agree = estimates_agree(&estimates[0], &estimates[1]);
            ok &= agree;
            if !agree {
                notes.push(format!("N={n}#{k} U and SU estimates disagree"));
            }
        }
    }
    Ok((ok, notes.join(", ")))
}

/// Random `(A, B)` with spectral radius at most 0.5.
fn spectral_pair(n: usize, rng: &mut ChaCha8Rng) -> (CMatrix, CMatrix) {
    let mut draw = || {
        let eigs: Vec<C64> = (0..n).map(|_| random_disk(rng, 0.5)).collect();
        with_spectrum(&eigs, rng)
    };
    (draw(), draw())
}

fn loop_model(a: CMatrix, b: CMatrix, convention: WeightConvention, d: usize) -> Result<ModelSpec> {
    let n = a.nrows();
    ModelSpec::new(
        Group::U,
        RibbonGraph::loop_graph(),
        CornerAssignment::new(n, BTreeMap::from([(1, a), (-1, b)]))?,
        vec![PowerSums::p_infinity(d)],
        CouplingMode::Vertex,
        convention,
    )
}

fn shells_match(x: &SeriesSum, y: &SeriesSum) -> bool {
    x.shells().len() == y.shells().len()
        && x.shells().iter().zip(y.shells()).all(|(s, t)| (s - t).norm() <= 1e-12 * (t.norm() + 1e-300))
}

fn calibration() -> Result<(bool, String)> {
    let d = 10;
    let trunc = TruncationPolicy::new(d);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let pairs: Vec<(CMatrix, CMatrix)> = vec![
        (crate::linalg::real_diagonal(&[0.3, 0.1]), crate::linalg::real_diagonal(&[0.2, 0.4])),
        spectral_pair(3, &mut rng),
    ];
    let mut passing = Vec::new();
    let mut notes = Vec::new();
    let mut mc_results: Vec<Vec<bool>> = vec![Vec::new(); WeightConvention::ALL.len()];
    let mut series_results: Vec<bool> = vec![true; WeightConvention::ALL.len()];
    for (k, (a, b)) in pairs.iter().enumerate() {
        let h = hciz_series(
            &SpectralMatrix::from_matrix(a.clone())?,
            &SpectralMatrix::from_matrix(b.clone())?,
            &trunc,
        )?;
        let mut cases = Vec::new();
        for (i, conv) in WeightConvention::ALL.into_iter().enumerate() {
            let model = loop_model(a.clone(), b.clone(), conv, d)?;
            series_results[i] &= shells_match(&z_series(&model, &trunc)?, &h);
            cases.push(IdentityCase::ZIntegral { model, truncation: Some(trunc) });
        }
        for (i, r) in verify_cases(&cases, SAMPLES, 600 + k as u64)?.into_iter().enumerate() {
            mc_results[i].push(r.pass);
        }
    }
    for (i, conv) in WeightConvention::ALL.into_iter().enumerate() {
        let mc = mc_results[i].iter().all(|&p| p);
        let label =
            format!("(n_power={}, scale={})", conv.unitary_n_power, conv.scale_couplings);
        notes.push(format!(
            "{label}: series {} MC {}",
            if series_results[i] { "ok" } else { "no" },
            if mc { "ok" } else { "no" }
        ));
        if series_results[i] && mc {
            passing.push(conv);
        }
    }
    let pass = passing.len() == 1 && passing[0] == WeightConvention::default();
    Ok((pass, notes.join("; ")))
}

/// All connected rotation systems on `n` edges.
pub fn all_graphs(n: usize) -> Vec<RibbonGraph> {
    let labels: Vec<Label> = (1..=n as Label).flat_map(|i| [i, -i]).collect();
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..labels.len()).collect();
    permutations(&mut perm, 0, &mut |p| {
        // p is the image table of σ on label positions
        let mut seen = vec![false; p.len()];
        let mut rotations = Vec::new();
        for start in 0..p.len() {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                cycle.push(labels[x]);
                x = p[x];
            }
            rotations.push(cycle);
        }
        if let Ok(g) = RibbonGraph::new(n, rotations) {
            out.push(g);
        }
    });
    out
}

fn permutations(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == v.len() {
        visit(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, visit);
        v.swap(k, i);
    }
}

/// Random connected rotation system on `n` edges.
pub fn random_graph(n: usize, rng: &mut ChaCha8Rng) -> RibbonGraph {
    loop {
        let mut labels: Vec<Label> = (1..=n as Label).flat_map(|i| [i, -i]).collect();
        for i in (1..labels.len()).rev() {
            labels.swap(i, rng.random_range(0..=i));
        }
        let mut rotations = Vec::new();
        let mut rest = labels.as_slice();
        while !rest.is_empty() {
            let take = rng.random_range(1..=rest.len());
            rotations.push(rest[..take].to_vec());
            rest = &rest[take..];
        }
        if let Ok(g) = RibbonGraph::new(n, rotations) {
            return g;
        }
    }
}

fn dual_ok(g: &RibbonGraph) -> bool {
    let dd = g.dual().dual();
    dd.canonical_form() == g.canonical_form()
        && g.dual().euler_characteristic() == g.euler_characteristic()
}

fn duality() -> Result<(bool, String)> {
    let mut count = 0;
    let mut bad = 0;
    for n in 1..=3 {
        for g in all_graphs(n) {
            count += 1;
            bad += usize::from(!dual_ok(&g));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let g = random_graph(rng.random_range(1..=5), &mut rng);
        count += 1;
        bad += usize::from(!dual_ok(&g));
    }
    let named = RibbonGraph::segment().face_count() == 1
        && RibbonGraph::loop_graph().face_count() == 2
        && RibbonGraph::torus().euler_characteristic() == 0;
    Ok((
        bad == 0 && named,
        format!("{count} graphs, {bad} failures; segment/loop/torus calibration {}", if named { "ok" } else { "wrong" }),
    ))
}

fn gauge() -> Result<(bool, String)> {
    let n = 3;
    let d = 8;
    let (a, b) = test_pair(n);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let coupling =
        PowerSums::new((0..d).map(|_| random_disk(&mut rng, 0.4)).collect::<Vec<_>>())?;
    let graph = RibbonGraph::loop_graph();
    let model = |a: CMatrix, b: CMatrix| {
        ModelSpec::new(
            Group::U,
            graph.clone(),
            CornerAssignment::new(n, BTreeMap::from([(1, a), (-1, b)]))?,
            vec![coupling.clone()],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
    };
    let trunc = TruncationPolicy::new(d);
    let base = model(a.clone(), b.clone())?;
    let z0 = z_series(&base, &trunc)?.value();
    let mut worst: f64 = 0.0;
    let mut all_similar = true;
    for _ in 0..10 {
        let g = CMatrix::identity(n, n) + random_shift(n, &mut rng);
        let h = sample_unitary(n, &mut rng) * c(1.3, 0.2);
        let moved = model(
            &g * &a * g.clone().try_inverse().expect("invertible"),
            &h * &b * h.clone().try_inverse().expect("invertible"),
        )?;
        all_similar &= gauge_spectrum_check(&base.corners, &moved.corners, &graph);
        worst = worst.max((z_series(&moved, &trunc)?.value() - z0).norm());
    }
    Ok((
        worst <= 1e-9 && all_similar,
        format!("10 re-assignments at N=3, max |dZ| = {worst:.1e}, spectra preserved: {all_similar}"),
    ))
}

fn random_shift(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| c(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2)))
}

fn hypergeometric(weight: RationalWeight, spectrum: &[f64], d: usize) -> Result<HypTauSpec> {
    HypTauSpec::new(
        PowerSums::zero(d),
        SpectralMatrix::from_eigenvalues(spectrum.iter().map(|&x| c(x, 0.0)).collect())?,
        weight.to_weight(d, spectrum.len())?,
        TruncationPolicy::new(d),
    )
}

fn kp() -> Result<(bool, String)> {
    let bound = 1e-4;
    let base = PowerSums::new(vec![c(0.03, 0.0), c(-0.04, 0.0), c(0.03, 0.0)])?;
    let exp_spec = hypergeometric(RationalWeight::default(), &[0.3], 14)?;
    let exponential = kp_residual(&exp_spec, &base, DEFAULT_STEP)?;

    let spectrum = [0.3, 0.2, 0.1];
    let r = RationalWeight { num_shifts: vec![], den_shifts: vec![3.0], overrides: BTreeMap::new() };
    let hyp_spec = hypergeometric(r, &spectrum, 10)?;
    let hyp = kp_residual(&hyp_spec, &base, DEFAULT_STEP)?;

    let bad = Partition::new(vec![1, 1])?;
    let ey = crate::symfun::schur_of_matrix(&bad, &hyp_spec.spectrum)?;
    let r11 = content_product(&bad, &hyp_spec.weight);
    let corrupted = kp_residual_with(
        |p| {
            let s = hyp_tau_series(&hyp_spec.at(p.clone()))?;
            let mut shells = s.shells().to_vec();
            shells[2] += 0.5 * schur_from_power_sums(&bad, p)? * ey * r11;
            Ok(SeriesSum::from_shells(shells))
        },
        &base,
        DEFAULT_STEP,
        10,
    )?;

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut random_worst: f64 = 0.0;
    for _ in 0..5 {
        let k = rng.random_range(1..=2);
        let w = RationalWeight {
            num_shifts: (0..k).map(|_| rng.random_range(0.5..3.0)).collect(),
            den_shifts: (0..k).map(|_| rng.random_range(3.0..5.0)).collect(),
            overrides: BTreeMap::new(),
        };
        let res = kp_residual(&hypergeometric(w, &spectrum, 14)?, &base, DEFAULT_STEP)?;
        random_worst = random_worst.max(res.relative);
    }
    let pass = exponential.absolute <= 1e-8
        && hyp.relative <= bound
        && corrupted.relative >= 10.0 * bound
        && random_worst <= bound;
    Ok((
        pass,
        format!(
            "exponential {:.1e}, hypergeometric {:.1e} (relative), 5 random weights at D=14 \
             worst {:.1e}, corrupted control {:.1e}",
            exponential.absolute, hyp.relative, random_worst, corrupted.relative
        ),
    ))
}

fn bgw_scalar() -> Result<(bool, String)> {
    let (beta, a, b) = (0.3, 0.5, 0.4);
    let sa = SpectralMatrix::from_eigenvalues(vec![c(a, 0.0)])?;
    let sb = SpectralMatrix::from_eigenvalues(vec![c(b, 0.0)])?;
    let trunc = TruncationPolicy::new(16).with_q_max(8);
    let total = bgw_series(&sa, &sb, c(beta, 0.0), Group::SU, &trunc)?.value();
    let err = (total - c((beta * (a + b)).exp(), 0.0)).norm();
    let parts = bgw_q_decomposition(&sa, &sb, c(beta, 0.0), 8, &trunc)?;
    let summed = parts.iter().fold(C64::new(0.0, 0.0), |acc, (_, s)| acc + s.value());
    let exact = summed == total;
    Ok((
        err <= 1e-8 && exact,
        format!("error {err:.1e}; q-decomposition sums exactly to the total: {exact}"),
    ))
}
