use approx::assert_relative_eq;
use besovlab::besov::{
    besov_norm_diff, besov_seminorm_diff, embedding_lhs, littlewood_paley_norm, sobolev_norm_fourier,
};
use besovlab::catalog::catalog_family;
use besovlab::grid::{linf_on_interval, lp_norm, sample};
use besovlab::{DyadicHGrid, FunctionSpec, GridFunction, LPFilterBank, SpaceParams};
use proptest::prelude::*;

const WINDOW: (f64, f64) = (-16.0, 16.0);
const COUNT: usize = (1 << 13) + 1;

fn catalog_samples() -> Vec<(String, GridFunction<f64>)> {
    catalog_family().iter().map(|s| (s.to_string(), sample::<f64>(s, WINDOW, COUNT).unwrap())).collect()
}

fn p_strategy() -> impl Strategy<Value = f64> {
    prop_oneof![Just(0.5), Just(1.0), Just(1.5), Just(2.0), Just(4.0), Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lp_norm_is_homogeneous(c in -50.0f64..50.0, p in p_strategy(), k in 0usize..10) {
        let f = sample::<f64>(&catalog_family()[k], WINDOW, 2049).unwrap();
        let lhs = lp_norm(&f.scale(c), p).unwrap();
        let rhs = c.abs() * lp_norm(&f, p).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
    }

    #[test]
    fn lp_quasi_triangle(p in p_strategy(), i in 0usize..10, j in 0usize..10, c in -3.0f64..3.0) {
        let fam = catalog_family();
        let f = sample::<f64>(&fam[i], WINDOW, 2049).unwrap();
        let g = sample::<f64>(&fam[j], WINDOW, 2049).unwrap().scale(c);
        let sum = lp_norm(&f.add(&g).unwrap(), p).unwrap();
        let (nf, ng) = (lp_norm(&f, p).unwrap(), lp_norm(&g, p).unwrap());
        if p >= 1.0 {
            prop_assert!(sum <= (nf + ng) * (1.0 + 1e-12));
        } else {
            prop_assert!(sum.powf(p) <= (nf.powf(p) + ng.powf(p)) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn besov_norm_is_homogeneous(c in 0.01f64..100.0, k in 0usize..10) {
        let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
        let f = sample::<f64>(&catalog_family()[k], WINDOW, 2049).unwrap();
        let hg = DyadicHGrid::default();
        let lhs = besov_norm_diff(&f.scale(c), &sp, &hg).unwrap();
        let rhs = c * besov_norm_diff(&f, &sp, &hg).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs);
    }
}

#[test]
fn lp_norm_converges_under_refinement() {
    for spec in [FunctionSpec::gaussian(), FunctionSpec::XGauss, FunctionSpec::Bump { center: 0.0, radius: 1.0 }] {
        let mut prev: Option<f64> = None;
        let mut diffs = Vec::new();
        for n in [1025usize, 2049, 4097, 8193] {
            let v = lp_norm(&sample::<f64>(&spec, WINDOW, n).unwrap(), 2.0).unwrap();
            if let Some(p) = prev {
                diffs.push(((v - p).abs(), n));
            }
            prev = Some(v);
        }
        for (d, n) in diffs {
            assert!(d < 10.0 / n as f64, "{spec}: |delta| = {d} at n = {n}");
        }
    }
}

#[test]
fn embedding_sup_bounded_by_besov_norm() {
    let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
    let hg = DyadicHGrid::default();
    for (name, f) in catalog_samples() {
        let b = besov_norm_diff(&f, &sp, &hg).unwrap();
        let sup = linf_on_interval(&f, WINDOW);
        let local = embedding_lhs(&f, 2.0).unwrap();
        assert!(sup <= 2.0 * b, "{name}: sup {sup} vs norm {b}");
        assert!(local <= 2.0 * b, "{name}: local {local} vs norm {b}");
    }
}

#[test]
fn algebra_property_on_catalog_pairs() {
    let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
    let hg = DyadicHGrid::default();
    let fs = catalog_samples();
    let norms: Vec<f64> = fs.iter().map(|(_, f)| besov_norm_diff(f, &sp, &hg).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for i in 0..fs.len() {
        for j in i..fs.len() {
            let prod = fs[i].1.mul(&fs[j].1).unwrap();
            worst = worst.max(besov_norm_diff(&prod, &sp, &hg).unwrap() / (norms[i] * norms[j]));
        }
    }
    assert!(worst > 0.0 && worst <= 5.0, "C_alg = {worst}");
}

#[test]
fn seminorm_nonincreasing_in_q_up_to_lattice_constant() {
    let hg = DyadicHGrid::default();
    let w = hg.node_weight();
    let qs = [1.0, 2.0, 4.0, f64::INFINITY];
    for (name, f) in catalog_samples() {
        let vals: Vec<f64> = qs
            .iter()
            .map(|&q| besov_seminorm_diff(&f, &SpaceParams::new(1.5, 2.0, q, 2).unwrap(), &hg).unwrap())
            .collect();
        for a in 0..qs.len() {
            for b in a + 1..qs.len() {
                let lattice = w.powf(1.0 / qs[b] - 1.0 / qs[a]);
                assert!(
                    vals[b] <= lattice * vals[a] * 1.01,
                    "{name}: q = {} gives {} > {lattice} * {} (q = {})",
                    qs[b],
                    vals[b],
                    vals[a],
                    qs[a]
                );
            }
        }
    }
}

#[test]
fn cutoff_choice_changes_lp_norm_by_bounded_factor() {
    let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
    let a = LPFilterBank::default();
    let b = LPFilterBank { cutoff_order: 4, ..a };
    for (name, f) in catalog_samples() {
        let r = littlewood_paley_norm(&f, &sp, &a).unwrap() / littlewood_paley_norm(&f, &sp, &b).unwrap();
        assert!((0.5..=2.0).contains(&r), "{name}: ratio {r}");
    }
}

#[test]
fn order_choice_changes_besov_norm_by_bounded_factor() {
    let hg = DyadicHGrid::default();
    for (name, f) in catalog_samples() {
        let n2 = besov_norm_diff(&f, &SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap(), &hg).unwrap();
        let n3 = besov_norm_diff(&f, &SpaceParams::new(1.5, 2.0, 2.0, 3).unwrap(), &hg).unwrap();
        assert!((0.2..=5.0).contains(&(n2 / n3)), "{name}: {n2} vs {n3}");
    }
}

#[test]
fn sobolev_fourier_order_zero_and_scaling() {
    let f = sample::<f64>(&FunctionSpec::gaussian(), WINDOW, COUNT).unwrap();
    assert_relative_eq!(sobolev_norm_fourier(&f, 0.0, 2.0).unwrap(), lp_norm(&f, 2.0).unwrap(), max_relative = 1e-9);
    // Fattening the gaussian lowers the derivative part only.
    let g = sample::<f64>(&FunctionSpec::Gaussian { center: 0.0, width: 2.0 }, WINDOW, COUNT).unwrap();
    let ratio_l2 = lp_norm(&g, 2.0).unwrap() / lp_norm(&f, 2.0).unwrap();
    let ratio_h = sobolev_norm_fourier(&g, 2.0, 2.0).unwrap() / sobolev_norm_fourier(&f, 2.0, 2.0).unwrap();
    assert_relative_eq!(ratio_l2, 2f64.sqrt(), max_relative = 1e-6);
    assert!(ratio_h < ratio_l2);
}

#[test]
fn f32_and_f64_agree() {
    let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
    let hg = DyadicHGrid::default();
    let spec = FunctionSpec::gaussian();
    let a = besov_norm_diff(&sample::<f64>(&spec, WINDOW, 4097).unwrap(), &sp, &hg).unwrap();
    let b = besov_norm_diff(&sample::<f32>(&spec, (-16.0, 16.0), 4097).unwrap(), &sp, &hg).unwrap();
    assert_relative_eq!(a, b as f64, max_relative = 1e-3);
}
