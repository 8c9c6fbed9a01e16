use besovlab::lab::{
    check_nec_lipschitz, check_nec_u, classify, compose_spec, default_family, opnorm_lower, regime, LabConfig, Regime,
    Space, Status, Verdict,
};
use besovlab::runner::{default_suite, MapSpec};
use besovlab::{FunctionSpec, LabError, LineMap};

fn affine(lambda: f64) -> LineMap {
    LineMap::affine(lambda, 0.0, (-16.0, 16.0)).unwrap()
}

#[test]
fn identity_law_across_spaces() {
    let cfg = LabConfig::default();
    let spaces = [
        Space::besov(2.1, 2.0, 2.0).unwrap(),
        Space::besov(2.5, 1.5, 2.0).unwrap(),
        Space::besov(1.5, f64::INFINITY, 2.0).unwrap(),
        Space::sobolev(2.1, 2.0).unwrap(),
    ];
    for space in &spaces {
        let report = classify("identity", &LineMap::identity(), space, &cfg).unwrap();
        let op = report.computed.opnorm_lower.value;
        assert!((op - 1.0).abs() <= 1e-9, "{space}: opnorm {op}");
        for f in &report.fragments {
            assert!(
                matches!(f.status, Status::Pass | Status::Vacuous),
                "{space}: {} is {:?} {:?}",
                f.name,
                f.status,
                f.notes
            );
        }
        assert_eq!(report.verdict, Verdict::ConsistentBounded, "{space}");
    }
}

#[test]
fn shift_keeps_operator_norm_near_one() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let family = default_family(&space, &cfg);
    let op = opnorm_lower(&LineMap::identity().shifted(0.3), &space, &family, &cfg).unwrap();
    assert!((op.value - 1.0).abs() < 1e-2, "{}", op.value);
}

#[test]
fn dilation_operator_norm_nondecreasing() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let family = default_family(&space, &cfg);
    let values: Vec<f64> =
        [1.0, 1.5, 2.0, 3.0].iter().map(|&l| opnorm_lower(&affine(l), &space, &family, &cfg).unwrap().value).collect();
    for w in values.windows(2) {
        assert!(w[1] >= w[0], "{values:?}");
    }
}

#[test]
fn dilated_gaussian_matches_its_closed_form() {
    let cfg = LabConfig::default();
    let grid = cfg.grid().unwrap();
    let space = Space::besov(1.6, 2.0, 2.0).unwrap();
    let composed = compose_spec(&FunctionSpec::gaussian(), &affine(2.0), &grid);
    let direct =
        besovlab::grid::sample::<f64>(&FunctionSpec::Gaussian { center: 0.0, width: 0.5 }, grid.window(), grid.count)
            .unwrap();
    let a = space.norm(&composed, &cfg.hgrid).unwrap();
    let b = space.norm(&direct, &cfg.hgrid).unwrap();
    assert!((a - b).abs() <= 1e-12 * b, "{a} vs {b}");
}

#[test]
fn lipschitz_witness_recovers_slope_three() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let frag = check_nec_lipschitz(&affine(3.0), &space, &cfg).unwrap();
    assert_eq!(frag.status, Status::Pass, "{:?}", frag.notes);
    let implied = frag.value("implied_slope").unwrap();
    assert!((1.5..=6.0).contains(&implied), "{implied}");
}

#[test]
fn range_gates_refuse_with_named_errors() {
    let id = LineMap::identity();
    let refused = |space: Space| matches!(regime(&id, &space), Err(LabError::RangeRefused(_)));
    assert!(refused(Space::besov(1.2, 2.0, 2.0).unwrap()));
    assert!(refused(Space::besov(1.5, 2.0, 2.0).unwrap()));
    assert!(refused(Space::besov(2.5, 1.0, 2.0).unwrap()));
    assert!(refused(Space::besov(0.8, 2.0, 2.0).unwrap()));
    assert!(refused(Space::besov(0.9, f64::INFINITY, 2.0).unwrap()));
    let square = LineMap::polynomial(&[0.0, 0.0, 1.0], (-4.0, 4.0)).unwrap();
    assert!(matches!(regime(&square, &Space::sobolev(2.1, 2.0).unwrap()), Err(LabError::RangeRefused(_))));
    assert_eq!(regime(&id, &Space::besov(1.51, 2.0, 2.0).unwrap()).unwrap(), Regime::BesovFinite);
    assert_eq!(regime(&id, &Space::besov(1.01, f64::INFINITY, 2.0).unwrap()).unwrap(), Regime::BesovInfinity);
    match regime(&id, &Space::besov(1.2, 2.0, 2.0).unwrap()) {
        Err(e) => assert!(e.to_string().contains("open"), "{e}"),
        Ok(r) => panic!("{r:?}"),
    }
}

#[test]
fn inverse_pair_gets_the_same_verdict() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let phi = MapSpec::wobble().build().unwrap();
    let inv = phi.inverse(1001).unwrap();
    let a = classify("wobble", &phi, &space, &cfg).unwrap().verdict;
    let b = classify("wobble_inverse", &inv, &space, &cfg).unwrap().verdict;
    assert_eq!(a, b);
    assert_eq!(a, Verdict::ConsistentBounded);
}

#[test]
fn necessity_constant_is_uniform_over_bounded_suite_maps() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let family = default_family(&space, &cfg);
    let mut kappa: f64 = 0.0;
    for entry in default_suite() {
        let phi = entry.map.build().unwrap();
        if entry.label == "square" || entry.label == "kink" {
            continue;
        }
        let op = opnorm_lower(&phi, &space, &family, &cfg).unwrap();
        let frag = check_nec_u(&phi, &space, op.value, &cfg).unwrap();
        assert!(!frag.failed(), "{}: {:?}", entry.label, frag.notes);
        kappa = kappa.max(frag.value("kappa").unwrap());
    }
    assert!(kappa > 0.0 && kappa <= 3.0, "kappa {kappa}");
}

#[test]
fn derivative_jump_reads_as_unbounded() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let kink = default_suite().into_iter().find(|e| e.label == "kink").unwrap().map.build().unwrap();
    let report = classify("kink", &kink, &space, &cfg).unwrap();
    assert_eq!(report.verdict, Verdict::ConsistentUnbounded);
    assert!(!report.computed.derivative_jumps.is_empty());
}

#[test]
fn report_round_trips_through_json() {
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let report = classify("half", &affine(0.5), &space, &cfg).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["schema_version"], 1);
    assert_eq!(value["verdict"], "ConsistentBounded");
    assert!(value["config"]["a_step"].is_number());
}
