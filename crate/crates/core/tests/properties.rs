use loracap_core::analytic;
use loracap_core::quadrature::integrate;
use loracap_core::scenario::{self, bitrate, distance_thresholds, sensitivity_for_threshold};
use loracap_core::{
    CoSfThreshold, CodingRate, Model, Orthogonality, Policy, QuadratureSpec, Scenario, SpreadingFactor, SF_COUNT,
};
use proptest::prelude::*;

fn any_sf() -> impl Strategy<Value = SpreadingFactor> {
    (7u8..=12).prop_map(|m| SpreadingFactor::new(m).unwrap())
}

fn any_policy() -> impl Strategy<Value = Policy> {
    prop_oneof![Just(Policy::Distance), Just(Policy::Random)]
}

fn any_mode() -> impl Strategy<Value = Orthogonality> {
    prop_oneof![Just(Orthogonality::Perfect), Just(Orthogonality::Imperfect)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn primitive_matches_quadrature(
        r_i in 1.0f64..1000.0,
        q in 1e-3f64..100.0,
        a in 0.0f64..1000.0,
        width in 0.0f64..1000.0,
    ) {
        let radius = 1000.0;
        let b = (a + width).min(radius);
        let closed = analytic::primitive_j(r_i, b, q, radius, 4.0).unwrap()
            - analytic::primitive_j(r_i, a, q, radius, 4.0).unwrap();
        let spec = QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-12, max_subdivisions: 400, ..Default::default() };
        let oracle = integrate(
            |r| 2.0 * r / (radius * radius) / (1.0 + q * (r_i / r).powi(4)),
            a,
            b,
            &spec,
        ).unwrap();
        prop_assert!((closed - oracle).abs() < 1e-8, "{} vs {}", closed, oracle);
    }

    #[test]
    fn capture_terms_monotone_in_count(sf in any_sf(), policy in any_policy(), nodes in 2usize..40) {
        let model = Model::new(&Scenario { policy, ..Scenario::default() }).unwrap();
        let quad = QuadratureSpec::default();
        let t = analytic::capture_triplet(&model, sf, nodes, &quad).unwrap();
        prop_assert!((0.0..=1.0).contains(&t.p_rx));
        for w in t.p_cosf.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        for w in t.p_intsf.windows(2) {
            prop_assert!(w[1] + 1e-12 >= w[0]);
        }
        prop_assert!(t.p_cosf.iter().chain(&t.p_intsf).all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn raising_thresholds_never_helps(
        sf in any_sf(),
        policy in any_policy(),
        mode in any_mode(),
        nodes in 1usize..30,
        bump_db in 0.0f64..6.0,
        which in 0usize..3,
    ) {
        let quad = QuadratureSpec::default();
        let base = Scenario { policy, ..Scenario::default() };
        let mut raised = base.clone();
        match which {
            0 => raised.sf_table[sf.index()].q_sf_db += bump_db,
            1 => raised.sf_table[sf.index()].q_isf_db += bump_db,
            _ => raised.cosf_threshold = CoSfThreshold::Linear(4.0 * 10f64.powf(bump_db / 10.0)),
        }
        let (m0, m1) = (Model::new(&base).unwrap(), Model::new(&raised).unwrap());
        let p0 = analytic::p_success(&m0, sf, nodes, mode, &quad).unwrap();
        let p1 = analytic::p_success(&m1, sf, nodes, mode, &quad).unwrap();
        prop_assert!(p1 <= p0 + 1e-10, "{} > {}", p1, p0);
        let r0 = analytic::conditional_rx(&m0, sf, &quad).unwrap();
        let r1 = analytic::conditional_rx(&m1, sf, &quad).unwrap();
        prop_assert!(r1 <= r0 + 1e-12);
    }

    #[test]
    fn perfect_dominates_imperfect(sf in any_sf(), policy in any_policy(), nodes in 1usize..60) {
        let model = Model::new(&Scenario { policy, ..Scenario::default() }).unwrap();
        let quad = QuadratureSpec::default();
        let p = analytic::p_success(&model, sf, nodes, Orthogonality::Perfect, &quad).unwrap();
        let i = analytic::p_success(&model, sf, nodes, Orthogonality::Imperfect, &quad).unwrap();
        prop_assert!(p + 1e-10 >= i, "perfect {} < imperfect {}", p, i);
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&i));
    }

    #[test]
    fn thresholds_and_allocation_are_consistent(
        p0_dbm in 0.0f64..14.0,
        fc_mhz in 400.0f64..1000.0,
        radius_m in 900.0f64..3000.0,
        alpha in 3.5f64..4.5,
        policy in any_policy(),
    ) {
        let s = Scenario { p0_dbm, fc_mhz, radius_m, alpha, policy, ..Scenario::default() };
        let Ok(l) = distance_thresholds(&s) else { return Ok(()); };
        prop_assert_eq!(l[0], 0.0);
        prop_assert_eq!(l[SF_COUNT], radius_m);
        prop_assert!(l.windows(2).all(|w| w[0] <= w[1]));
        for (i, &lm) in l.iter().enumerate().take(SF_COUNT).skip(1) {
            let back = sensitivity_for_threshold(&s, lm);
            prop_assert!((back - s.sf_table[i - 1].sensitivity_dbm).abs() < 1e-9);
        }
        let profile = scenario::allocation_profile(&s).unwrap();
        prop_assert!((profile.p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn throughput_identity_bit_exact(policy in any_policy(), mode in any_mode(), nodes in 1usize..40) {
        let model = Model::new(&Scenario { policy, ..Scenario::default() }).unwrap();
        let prof = analytic::throughput(&model, nodes, mode, &QuadratureSpec::default()).unwrap();
        let recomputed = prof.per_sf.iter().zip(model.bitrates()).fold(0.0, |acc, (p, r)| acc + r * p);
        prop_assert_eq!(recomputed.to_bits(), prof.throughput_bps.to_bits());
    }
}

#[test]
fn bitrate_ratio_between_neighbours() {
    for n in 1..=4 {
        let cr = CodingRate::new(n).unwrap();
        for bw in [125e3, 250e3, 500e3] {
            for m in 7u8..12 {
                let a = bitrate(SpreadingFactor::new(m).unwrap(), cr, bw);
                let b = bitrate(SpreadingFactor::new(m + 1).unwrap(), cr, bw);
                let expected = 2.0 * m as f64 / (m as f64 + 1.0);
                assert!((a / b - expected).abs() <= 4.0 * f64::EPSILON, "m={m}");
            }
        }
    }
}

#[test]
fn bitrates_and_sensitivities_strictly_decrease() {
    let params = scenario::sf_params(&Scenario::default()).unwrap();
    for w in params.windows(2) {
        assert!(w[1].bitrate < w[0].bitrate);
        assert!(w[1].sensitivity_dbm < w[0].sensitivity_dbm);
        assert_eq!(w[0].annulus.hi, w[1].annulus.lo);
    }
    assert_eq!(params[0].annulus.lo, 0.0);
    assert_eq!(params[5].annulus.hi, 1000.0);
}
