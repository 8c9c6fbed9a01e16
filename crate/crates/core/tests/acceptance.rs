//! Acceptance criteria A1-A12. Each test writes one `A<n> PASS|FAIL` line to
//! stderr (uncaptured) and then asserts.

use std::io::Write;
use std::time::{Duration, Instant};

use besovlab::besov::{
    besov_seminorm_diff, difference_lp, littlewood_paley_norm, sobolev_norm_diff, sobolev_norm_fourier,
};
use besovlab::catalog::catalog_family;
use besovlab::gadgets::Ramp;
use besovlab::grid::sample;
use besovlab::lab::{
    check_infinity_witness, check_nec_u, check_sufficiency_chain, default_family, opnorm_lower, LabConfig, Space,
};
use besovlab::multipliers::{disjoint_translate_identity, msq_norm_lower, unif_norm, MsqSearch};
use besovlab::runner::{run_suite, MapSpec, RunConfig};
use besovlab::{
    make_psi, DyadicHGrid, Extension, FunctionSpec, Grid, GridFunction, IntervalFamily, LPFilterBank, LineMap, Profile,
    SpaceParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: &str, pass: bool, elapsed: Duration, detail: String) {
    let line = format!("{id} {} [{:.1} s] {detail}\n", if pass { "PASS" } else { "FAIL" }, elapsed.as_secs_f64());
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    assert!(pass, "{id} failed: {detail}");
}

fn wobble() -> LineMap {
    MapSpec::wobble().build().unwrap()
}

/// `(min, max)` of a ratio over the family, and `C = max(max, 1/min)`.
fn band(ratios: &[f64]) -> (f64, f64, f64) {
    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().cloned().fold(0.0, f64::max);
    (lo, hi, hi.max(1.0 / lo))
}

fn band_stable(a: (f64, f64, f64), b: (f64, f64, f64)) -> bool {
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs());
    rel(a.0, b.0) <= 0.2 && rel(a.1, b.1) <= 0.2
}

fn catalog_ratios(count: usize, ratio: impl Fn(&GridFunction<f64>) -> f64 + Sync) -> Vec<f64> {
    use rayon::prelude::*;
    catalog_family().par_iter().map(|spec| ratio(&sample::<f64>(spec, (-16.0, 16.0), count).unwrap())).collect()
}

#[test]
fn a01_characterization_band() {
    let t = Instant::now();
    let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
    let hg = DyadicHGrid::default();
    let bank = LPFilterBank::default();
    let ratio = |f: &GridFunction<f64>| {
        besovlab::besov::besov_norm_diff(f, &sp, &hg).unwrap() / littlewood_paley_norm(f, &sp, &bank).unwrap()
    };
    let coarse = band(&catalog_ratios((1 << 13) + 1, ratio));
    let fine = band(&catalog_ratios((1 << 14) + 1, ratio));
    let el = t.elapsed();
    let pass = coarse.2 <= 10.0 && band_stable(coarse, fine) && el.as_secs_f64() < 60.0;
    report(
        "A1",
        pass,
        el,
        format!(
            "diff/LP band [{:.3}, {:.3}] C = {:.3} (<= 10); refined [{:.3}, {:.3}] (+-20%)",
            coarse.0, coarse.1, coarse.2, fine.0, fine.1
        ),
    );
}

#[test]
fn a02_sobolev_band() {
    let t = Instant::now();
    let hg = DyadicHGrid::default();
    let ratio = |f: &GridFunction<f64>| {
        sobolev_norm_diff(f, 1.25, 2.0, 2, &hg).unwrap() / sobolev_norm_fourier(f, 1.25, 2.0).unwrap()
    };
    let coarse = band(&catalog_ratios((1 << 13) + 1, ratio));
    let fine = band(&catalog_ratios((1 << 14) + 1, ratio));
    let el = t.elapsed();
    let pass = coarse.2 <= 10.0 && band_stable(coarse, fine) && el.as_secs_f64() < 60.0;
    report(
        "A2",
        pass,
        el,
        format!(
            "diff/Fourier band [{:.3}, {:.3}] C' = {:.3} (<= 10); refined [{:.3}, {:.3}] (+-20%)",
            coarse.0, coarse.1, coarse.2, fine.0, fine.1
        ),
    );
}

#[test]
fn a03_polynomial_annihilation() {
    let t = Instant::now();
    let grid = Grid::over(-16.0, 16.0, (1 << 13) + 1).unwrap();
    let coeffs = [0.7, -1.3, 0.4];
    let mut hs: Vec<f64> = DyadicHGrid::default().nodes().iter().map(|n| n.h).collect();
    hs.extend((0..10).flat_map(|k| [2f64.powi(-k), -(2f64.powi(-k))]));
    let mut worst: f64 = 0.0;
    let mut sane = true;
    for m in 1..=3usize {
        let c = &coeffs[..m];
        let poly =
            GridFunction::from_fn(&grid, Extension::Constant, |x| c.iter().rev().fold(0.0, |acc, &a| acc * x + a));
        let scale = poly.sup_abs();
        for &h in &hs {
            worst = worst.max(difference_lp(&poly, m, h, f64::INFINITY) / scale);
        }
        // Degree m is not annihilated: Delta^m_h x^m = m! h^m.
        let mono = GridFunction::from_fn(&grid, Extension::Constant, |x| x.powi(m as i32));
        let h = 0.375;
        let got = difference_lp(&mono, m, h, f64::INFINITY);
        let want = (1..=m).product::<usize>() as f64 * h.powi(m as i32);
        sane &= (got - want).abs() <= 1e-8 * want;
    }
    let el = t.elapsed();
    let pass = worst <= 1e-10 && sane && el.as_secs_f64() < 5.0;
    report(
        "A3",
        pass,
        el,
        format!("max relative |Delta^m_h P| = {worst:.2e} (<= 1e-10) over {} steps; degree-m check {sane}", hs.len()),
    );
}

/// `|eta_eps((. - x0) / r)|` in `B^{1.5}_{2,2}` on a fine window.
fn eta_seminorm(eps: f64, x0: f64, r: f64) -> f64 {
    let sp = SpaceParams::new(1.5, 2.0, 2.0, 2).unwrap();
    let spec = FunctionSpec::EtaEps { eps, center: x0, scale: r, ramp: Ramp::Smooth };
    let f = sample::<f64>(&spec, (-8.0, 8.0), (1 << 14) + 1).unwrap();
    besov_seminorm_diff(&f, &sp, &DyadicHGrid::default()).unwrap()
}

#[test]
fn a04_eta_scaling_exponent() {
    let t = Instant::now();
    let eps: [f64; 3] = [0.2, 0.1, 0.05];
    let pts: Vec<(f64, f64)> = eps.iter().map(|&e| (e.ln(), eta_seminorm(e, 0.0, 1.0).ln())).collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let slope =
        pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let el = t.elapsed();
    let pass = (slope - (-1.0)).abs() <= 0.1 && el.as_secs_f64() < 30.0;
    report("A4", pass, el, format!("fitted slope {slope:.4}, expected 1/p - s = -1 (+-0.1)"));
}

#[test]
fn a05_dilation_identity() {
    let t = Instant::now();
    let (eps, s, p): (f64, f64, f64) = (0.2, 1.5, 2.0);
    let base = eta_seminorm(eps, 0.0, 1.0);
    let mut worst: f64 = 0.0;
    let mut literal_worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (r, x0) in [(0.5, 0.7), (1.0, -1.3), (2.0, 0.4)] {
        let got = eta_seminorm(eps, x0, r);
        let want = r.powf(1.0 / p - s) * base;
        let literal = r.powf(-1.0 / p + s) * base;
        worst = worst.max((got / want - 1.0).abs());
        literal_worst = literal_worst.max((got / literal - 1.0).abs());
        parts.push(format!("r={r}: {:.4}", got / want));
    }
    let el = t.elapsed();
    let pass = worst <= 0.02 && el.as_secs_f64() < 30.0;
    report(
        "A5",
        pass,
        el,
        format!(
            "|eta(( . - x0)/r)| / (r^(1/p-s) |eta|): {} (2%); exponent -1/p+s would be off by {:.0}%",
            parts.join(", "),
            literal_worst * 100.0
        ),
    );
}

#[test]
fn a06_preimage_bounds() {
    let t = Instant::now();
    let maps = [
        ("identity", LineMap::identity()),
        ("2x", LineMap::affine(2.0, 0.0, (-16.0, 16.0)).unwrap()),
        ("x^2", LineMap::polynomial(&[0.0, 0.0, 1.0], (-4.0, 4.0)).unwrap()),
        ("sine_fold", MapSpec::sine_fold().build().unwrap()),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut violations = 0;
    let mut parts = Vec::new();
    for (name, phi) in &maps {
        let u = phi.u_value();
        let cap = phi.max_preimage_count();
        for _ in 0..20 {
            let a = rng.random_range(-12.0..12.0);
            let b = rng.random_range(0.05..3.0);
            let set = phi.preimage_intervals((a - b, a + b)).unwrap();
            if set.total_length() > 2.0 * b.ceil() * u * (1.0 + 1e-6) || set.count() > cap {
                violations += 1;
            }
        }
        parts.push(format!("{name}: U={u:.3} N={cap}"));
    }
    let el = t.elapsed();
    let pass = violations == 0 && el.as_secs_f64() < 10.0;
    report("A6", pass, el, format!("{violations} violations over 80 targets ({})", parts.join(", ")));
}

#[test]
fn a07_split_partition_bound() {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let mut max_degree = 0;
    for _ in 0..10_000 {
        let n = rng.random_range(1..=200usize);
        let spread = rng.random_range(1.0..200.0);
        let items: Vec<[f64; 2]> = (0..n)
            .map(|_| {
                let l: f64 = rng.random_range(0.0..spread);
                [l, l + rng.random_range(0.0..5.0)]
            })
            .collect();
        let fam = IntervalFamily::new(items).unwrap();
        let degree = fam.intersection_degree();
        max_degree = max_degree.max(degree);
        let part = fam.split_partition();
        if !part.covers(n) || !part.classes_disjoint(&fam) || part.class_count() > degree + 1 {
            violations += 1;
        }
    }
    let el = t.elapsed();
    let pass = violations == 0 && el.as_secs_f64() < 20.0;
    report("A7", pass, el, format!("{violations} violations over 10^4 families (max degree {max_degree})"));
}

#[test]
fn a08_unit_interval_necessity() {
    let t = Instant::now();
    let cfg = LabConfig::default();
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let family = default_family(&space, &cfg);
    let maps = [
        ("identity", LineMap::identity()),
        ("x/2", LineMap::affine(0.5, 0.0, (-16.0, 16.0)).unwrap()),
        ("2x", LineMap::affine(2.0, 0.0, (-16.0, 16.0)).unwrap()),
        ("wobble", wobble()),
    ];
    let mut kappa: f64 = 0.0;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, phi) in &maps {
        let op = opnorm_lower(phi, &space, &family, &cfg).unwrap();
        let frag = check_nec_u(phi, &space, op.value, &cfg).unwrap();
        let k = frag.value("kappa").unwrap();
        ok &= !frag.failed();
        kappa = kappa.max(k);
        parts.push(format!("{name}: {k:.3}"));
    }
    let el = t.elapsed();
    let pass = ok && kappa <= 3.0 && el.as_secs_f64() < 120.0;
    report("A8", pass, el, format!("kappa = {kappa:.3} (<= 3); per map {}", parts.join(", ")));
}

#[test]
fn a09_chain_rule_residual() {
    let t = Instant::now();
    let cfg = LabConfig::default();
    assert_eq!(cfg.count, (1 << 13) + 1);
    let space = Space::besov(2.1, 2.0, 2.0).unwrap();
    let frag = check_sufficiency_chain(&wobble(), &FunctionSpec::gaussian(), &space, &cfg).unwrap();
    let residual = frag.value("residual").unwrap();
    let el = t.elapsed();
    let pass = residual < 1e-4 && el.as_secs_f64() < 10.0;
    report("A9", pass, el, format!("chain-rule residual {residual:.3e} (< 1e-4)"));
}

#[test]
fn a10_infinity_witness() {
    let t = Instant::now();
    let cfg = LabConfig::default();
    let sp = SpaceParams::with_default_order(1.5, f64::INFINITY, 2.0).unwrap();
    let space = Space::Besov(sp);
    let phi = wobble();
    let op = opnorm_lower(&phi, &space, &default_family(&space, &cfg), &cfg).unwrap();
    let frag = check_infinity_witness(&phi, &sp, op.value, &cfg).unwrap();
    let recon = frag.value("reconstructed_lipschitz").unwrap();
    let direct = frag.value("direct_seminorm").unwrap();
    let bound = frag.value("bound").unwrap();
    let el = t.elapsed();
    let recon_ok = (recon / 1.5 - 1.0).abs() <= 0.02;
    let chain_ok = direct <= bound * 1.1;
    let pass = recon_ok && chain_ok && el.as_secs_f64() < 120.0;
    report(
        "A10",
        pass,
        el,
        format!("reconstructed sup|phi'| = {recon:.5} (1.5 +-2%); |phi'| = {direct:.4} <= 1.1 * {bound:.4}"),
    );
}

#[test]
fn a11_multiplier_ordering() {
    let t = Instant::now();
    let grid = Grid::over(-8.0, 8.0, 4097).unwrap();
    let sp = SpaceParams::new(0.5, 2.0, 2.0, 1).unwrap();
    let hg = DyadicHGrid::default();
    let psi = make_psi(Profile::default()).unwrap();
    let functions = [
        ("1", GridFunction::from_fn(&grid, Extension::Constant, |_| 1.0)),
        ("sin", GridFunction::from_fn(&grid, Extension::Constant, f64::sin)),
        ("psi", psi.translate_on(&grid, 0)),
    ];
    let mut ordered = true;
    let mut parts = Vec::new();
    for (name, f) in &functions {
        let unif = unif_norm(f, &sp, &psi, &hg).unwrap().value;
        let msq = msq_norm_lower(f, &sp, &psi, &hg, &MsqSearch::default()).unwrap().value;
        ordered &= msq >= unif;
        parts.push(format!("{name}: msq {msq:.4} >= unif {unif:.4}"));
    }
    let mut worst: f64 = 0.0;
    for p in [1.0, 1.5, 2.0, 3.0] {
        let coeffs = [(-6, 0.3), (-3, -1.2), (0, 2.0), (3, 0.5), (6, -0.8)];
        let (lhs, rhs) = disjoint_translate_identity(&psi, &grid, &coeffs, p).unwrap();
        worst = worst.max((lhs - rhs).abs() / rhs);
    }
    let el = t.elapsed();
    let pass = ordered && worst <= 1e-10 && el.as_secs_f64() < 60.0;
    report(
        "A11",
        pass,
        el,
        format!("{}; disjoint-translate identity rel. error {worst:.2e} (<= 1e-10)", parts.join(", ")),
    );
}

#[test]
fn a12_suite_determinism() {
    let t = Instant::now();
    let cfg = RunConfig::default();
    let first = run_suite(&cfg).unwrap().canonical_json();
    let second = run_suite(&cfg).unwrap().canonical_json();
    let el = t.elapsed();
    let pass = first == second && el.as_secs_f64() < 600.0;
    report(
        "A12",
        pass,
        el,
        format!("two suite runs, {} bytes of JSON each, identical: {}", first.len(), first == second),
    );
}

#[test]
fn sanity_wobble_is_the_expected_map() {
    let phi = wobble();
    for x in [-3.0, 0.0, 1.0, 2.5] {
        assert!((phi.eval(x) - (x + 0.5 * f64::sin(x))).abs() < 1e-6);
    }
    assert!((phi.lipschitz_constant() - 1.5).abs() < 1e-6);
}
