use std::collections::BTreeMap;

use proptest::prelude::*;
use ribbonsum::linalg::{power_traces, real_diagonal, CMatrix};
use ribbonsum::model::{
    gauge_spectrum_check, monodromy_matrix, z_series, CornerAssignment, CouplingMode, Group,
    ModelSpec, TruncationPolicy, WeightConvention,
};
use ribbonsum::ribbon::RibbonGraph;
use ribbonsum::symfun::{power_sums_of_matrix, PowerSums, SpectralMatrix};
use ribbonsum::tau::{apply_specialization, hyp_tau, Directive, HypTauSpec, SpecializationPlan};
use ribbonsum::partitions::CellContentWeight;
use ribbonsum::C64;

fn entry() -> impl Strategy<Value = C64> {
    (-0.4f64..0.4, -0.4f64..0.4).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(entry(), n * n).prop_map(move |v| CMatrix::from_vec(n, n, v))
}

fn invertible(n: usize) -> impl Strategy<Value = CMatrix> {
    matrix(n).prop_map(move |m| m + CMatrix::identity(n, n))
}

fn couplings(d: usize) -> impl Strategy<Value = PowerSums<C64>> {
    proptest::collection::vec(entry(), d).prop_map(|v| PowerSums::new(v).unwrap())
}

fn loop_model(a: CMatrix, b: CMatrix, p: PowerSums<C64>) -> ModelSpec {
    let n = a.nrows();
    ModelSpec::new(
        Group::U,
        RibbonGraph::loop_graph(),
        CornerAssignment::new(n, BTreeMap::from([(1, a), (-1, b)])).unwrap(),
        vec![p],
        CouplingMode::Vertex,
        WeightConvention::default(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn series_depends_only_on_face_spectra(
        a in matrix(3), b in matrix(3), g in invertible(3), h in invertible(3), p in couplings(6)
    ) {
        let trunc = TruncationPolicy::new(6);
        let base = loop_model(a.clone(), b.clone(), p.clone());
        let gi = g.clone().try_inverse().unwrap();
        let hi = h.clone().try_inverse().unwrap();
        let moved = loop_model(&g * &a * gi, &h * &b * hi, p);
        prop_assert!(gauge_spectrum_check(&base.corners, &moved.corners, &base.graph));
        let z0 = z_series(&base, &trunc).unwrap().value();
        let z1 = z_series(&moved, &trunc).unwrap().value();
        prop_assert!((z0 - z1).norm() <= 1e-9);
    }

    #[test]
    fn rotated_words_have_equal_power_traces(
        mats in proptest::collection::vec(matrix(2), 4), k in 1usize..4
    ) {
        let graph = RibbonGraph::torus();
        let corners = CornerAssignment::new(2, graph.labels().zip(mats).collect()).unwrap();
        let word = &graph.vertex_words()[0];
        let t0 = power_traces(&monodromy_matrix(word.labels(), &corners, None).unwrap(), 6);
        let t1 = power_traces(&monodromy_matrix(&word.rotated(k), &corners, None).unwrap(), 6);
        for (x, y) in t0.iter().zip(&t1) {
            prop_assert!((x - y).norm() <= 1e-12);
        }
    }

    #[test]
    fn tau_form_is_symmetric(
        xs in proptest::collection::vec(-0.4f64..0.4, 3),
        ys in proptest::collection::vec(-0.4f64..0.4, 3),
    ) {
        let d = 7;
        let spectral = |v: &[f64]| {
            SpectralMatrix::from_eigenvalues(v.iter().map(|&x| C64::new(x, 0.0)).collect()).unwrap()
        };
        let (x, y) = (spectral(&xs), spectral(&ys));
        let w = CellContentWeight::new(|m| C64::new(1.0 / (3.0 + m as f64), 0.0));
        let t = TruncationPolicy::new(d);
        let fwd = HypTauSpec::new(power_sums_of_matrix(&x, d).unwrap(), y.clone(), w.clone(), t).unwrap();
        let rev = HypTauSpec::new(power_sums_of_matrix(&y, d).unwrap(), x, w, t).unwrap();
        prop_assert!((hyp_tau(&fwd).unwrap() - hyp_tau(&rev).unwrap()).norm() <= 1e-10);
    }

    #[test]
    fn specialized_planar_models_match_the_series(
        c1 in matrix(2), c2 in matrix(2), units in 0usize..=2
    ) {
        // figure-eight: one vertex, faces (1), (-1,-2), (2); face 2 is fixed to I[units]
        let graph = RibbonGraph::new(2, vec![vec![1, -1, 2, -2]]).unwrap();
        let fixed = graph.faces().iter().position(|f| f.labels() == [2]).unwrap();
        let mut partial = vec![0.0; 2];
        partial.iter_mut().take(units).for_each(|x| *x = 1.0);
        let corners = CornerAssignment::new(
            2,
            BTreeMap::from([(1, c1), (-1, c2), (-2, CMatrix::identity(2, 2)), (2, real_diagonal(&partial))]),
        )
        .unwrap();
        let model = ModelSpec::new(
            Group::U,
            graph,
            corners,
            vec![PowerSums::p_infinity(7)],
            CouplingMode::Vertex,
            WeightConvention::default(),
        )
        .unwrap();
        let plan = SpecializationPlan::new(vec![Directive::Face { face: fixed, units }]);
        let spec = apply_specialization(&plan, &model).unwrap();
        let z = z_series(&model, &TruncationPolicy::new(7)).unwrap().value();
        prop_assert!((hyp_tau(&spec).unwrap() - z).norm() <= 1e-9);
    }
}
