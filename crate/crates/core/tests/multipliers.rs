use besovlab::besov::besov_norm_diff;
use besovlab::catalog::catalog_family;
use besovlab::grid::{lp_norm, sample};
use besovlab::multipliers::{
    disjoint_translate_identity, msq_norm_lower, multiplier_norm_lower, unif_norm, window_translates, MsqSearch,
};
use besovlab::{make_psi, DyadicHGrid, Extension, Grid, GridFunction, Profile, SpaceParams};
use proptest::prelude::*;

fn psi_testers(grid: &Grid<f64>) -> Vec<GridFunction<f64>> {
    let psi = make_psi(Profile::default()).unwrap();
    let probe = GridFunction::zeros(grid);
    window_translates(&probe).into_iter().map(|z| psi.translate_on(grid, z)).collect()
}

#[test]
fn multiplier_lower_bound_dominates_scaled_unif() {
    let grid = Grid::over(-8.0, 8.0, 4097).unwrap();
    let sp = SpaceParams::new(0.5, 2.0, 2.0, 1).unwrap();
    let hg = DyadicHGrid::default();
    let psi = make_psi(Profile::default()).unwrap();
    let testers = psi_testers(&grid);
    let psi_norm = testers.iter().map(|g| besov_norm_diff(g, &sp, &hg).unwrap()).fold(0.0, f64::max);
    for (name, f) in [
        ("sin", GridFunction::from_fn(&grid, Extension::Constant, f64::sin)),
        ("cos2", GridFunction::from_fn(&grid, Extension::Constant, |x| (2.0 * x).cos())),
        ("gauss", sample::<f64>(&besovlab::FunctionSpec::gaussian(), (-8.0, 8.0), 4097).unwrap()),
    ] {
        let unif = unif_norm(&f, &sp, &psi, &hg).unwrap().value;
        let mult = multiplier_norm_lower(&f, &sp, &testers, &hg).unwrap().value;
        assert!(mult * psi_norm >= unif * (1.0 - 1e-12), "{name}: mult {mult}, unif {unif}, |psi| {psi_norm}");
    }
}

#[test]
fn msq_dominates_unif_for_oscillating_functions() {
    let grid = Grid::over(-8.0, 8.0, 4097).unwrap();
    let sp = SpaceParams::new(0.5, 2.0, 2.0, 1).unwrap();
    let hg = DyadicHGrid::default();
    let psi = make_psi(Profile::default()).unwrap();
    for k in [0.5f64, 1.0, 3.0] {
        let f = GridFunction::from_fn(&grid, Extension::Constant, |x| (k * x).sin() + 0.3);
        let unif = unif_norm(&f, &sp, &psi, &hg).unwrap();
        let msq = msq_norm_lower(&f, &sp, &psi, &hg, &MsqSearch::default()).unwrap();
        assert!(msq.value >= unif.value);
        assert_eq!(msq.seed, Some(MsqSearch::default().seed));
    }
}

#[test]
fn infinity_multiplier_ratio_stays_in_band() {
    let sp = SpaceParams::new(0.5, f64::INFINITY, 2.0, 1).unwrap();
    let hg = DyadicHGrid::default();
    let grid = Grid::over(-16.0, 16.0, 4097).unwrap();
    let mut testers = psi_testers(&grid);
    testers.push(GridFunction::from_fn(&grid, Extension::Constant, |_| 1.0));
    for spec in catalog_family() {
        let f = sample::<f64>(&spec, (-16.0, 16.0), 4097).unwrap();
        let ratio =
            multiplier_norm_lower(&f, &sp, &testers, &hg).unwrap().value / besov_norm_diff(&f, &sp, &hg).unwrap();
        assert!((1.0 - 1e-9..=10.0).contains(&ratio), "{spec}: {ratio}");
    }
}

#[test]
fn constant_one_is_a_multiplier_but_its_lp_norm_grows() {
    let sp = SpaceParams::new(0.5, 2.0, 2.0, 1).unwrap();
    let hg = DyadicHGrid::default();
    let mut norms = Vec::new();
    for half in [8.0, 16.0] {
        let grid = Grid::over(-half, half, 4097).unwrap();
        let one = GridFunction::from_fn(&grid, Extension::Constant, |_| 1.0);
        let mult = multiplier_norm_lower(&one, &sp, &psi_testers(&grid), &hg).unwrap().value;
        assert!((mult - 1.0).abs() < 1e-9, "window {half}: {mult}");
        let inside = GridFunction::from_fn(&grid, Extension::Zero, |_| 1.0);
        norms.push(lp_norm(&inside, 2.0).unwrap());
    }
    assert!((norms[1] / norms[0] - 2f64.sqrt()).abs() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn disjoint_translates_split_the_lp_norm(
        coeffs in proptest::collection::vec(-3.0f64..3.0, 1..6),
        p in 1.0f64..4.0,
    ) {
        let psi = make_psi(Profile::default()).unwrap();
        let grid = Grid::over(-10.0, 10.0, 4097).unwrap();
        let cs: Vec<(i64, f64)> = coeffs.iter().enumerate().map(|(i, &c)| (-6 + 3 * i as i64, c)).collect();
        let (lhs, rhs) = disjoint_translate_identity(&psi, &grid, &cs, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1e-300));
    }

    #[test]
    fn psi_sums_to_one(x in -3.0f64..3.0, radius in 0.51f64..1.0) {
        for profile in [Profile::Mollifier { radius }, Profile::Tent { radius }] {
            let psi = make_psi(profile).unwrap();
            let total: f64 = (-5..=5).map(|z| psi.value(x - z as f64)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
