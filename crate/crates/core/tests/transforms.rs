use std::sync::Arc;

use dbar_core::grid::{lp_norm, ComplexGrid, Domain, Field};
use dbar_core::transforms::dbar::interior;
use dbar_core::transforms::{
    beltrami_solve, beurling_transform, beurling_transform_on, cauchy_transform, dz, dzbar,
    padded_grid, smooth_test_function, verify_cauchy_estimates, BeltramiProblem,
};
use dbar_core::C64;

fn disc(res: usize) -> Arc<ComplexGrid> {
    Arc::new(ComplexGrid::build(Domain::unit_disc(), res).unwrap())
}

fn dbar_inverse_error(res: usize, seed: u64) -> f64 {
    let g = disc(res);
    let f = smooth_test_function(&g, seed);
    let back = dzbar(&cauchy_transform(&f).unwrap(), 0);
    let inner = interior(&g, 1);
    let diff = back.sub(&f).unwrap();
    lp_norm(&diff, 2.0, Some(&inner)).unwrap() / lp_norm(&f, 2.0, Some(&inner)).unwrap()
}

#[test]
fn dbar_inverts_cauchy_transform_with_refinement() {
    for seed in 1..=2 {
        let e: Vec<f64> = [64, 128, 256].iter().map(|&r| dbar_inverse_error(r, seed)).collect();
        assert!(e[2] <= 0.02, "{e:?}");
        let order = (e[0] / e[2]).log2() / 2.0;
        assert!(order >= 1.0, "{e:?}");
    }
}

#[test]
fn transform_is_holomorphic_off_support() {
    let g = disc(128);
    let f = Field::from_fn(g.clone(), |p| {
        let r2 = p[0].norm_sqr() / 0.25;
        C64::new(dbar_core::numeric::bump(r2), 0.0)
    });
    let t = cauchy_transform(&f).unwrap();
    let d = dzbar(&t, 0);
    let inner = interior(&g, 1);
    let off: Vec<bool> = (0..g.len()).map(|i| inner[i] && g.z(i).norm() > 0.6).collect();
    let scale = lp_norm(&t, f64::INFINITY, None).unwrap();
    assert!(lp_norm(&d, f64::INFINITY, Some(&off)).unwrap() < 1e-3 * scale);
}

#[test]
fn beurling_of_disc_indicator() {
    let g = disc(256);
    let one = Field::constant(g.clone(), C64::new(1.0, 0.0));
    let big = Arc::new(padded_grid(&g, 64));
    let s = beurling_transform_on(&one, big.clone()).unwrap();
    let mut worst = 0.0f64;
    for i in 0..big.len() {
        let z = big.z(i);
        if (z.norm() - 1.0).abs() < 0.05 {
            continue;
        }
        let exact = if z.norm() < 1.0 {
            C64::new(0.0, 0.0)
        } else {
            -1.0 / (z * z)
        };
        worst = worst.max((s.at(i) - exact).norm());
    }
    assert!(worst <= 0.02, "{worst}");
}

#[test]
fn beurling_is_l2_bounded_and_matches_dz_of_t() {
    let g = disc(128);
    for seed in 1..=3 {
        let h = smooth_test_function(&g, seed);
        let s = beurling_transform(&h).unwrap();
        let ratio = lp_norm(&s.masked(), 2.0, None).unwrap() / lp_norm(&h, 2.0, None).unwrap();
        assert!(ratio <= 1.02, "{ratio}");
        let via_t = dz(&cauchy_transform(&h).unwrap(), 0);
        let inner = interior(&g, 1);
        let d = s.sub(&via_t).unwrap();
        let rel = lp_norm(&d, 2.0, Some(&inner)).unwrap() / lp_norm(&s, 2.0, Some(&inner)).unwrap();
        assert!(rel < 0.02, "{rel}");
    }
}

#[test]
fn beltrami_ratio_is_bounded_by_coefficient() {
    let g = disc(128);
    let alpha = Field::constant(g.clone(), C64::new(0.3, 0.0));
    for seed in 1..=3 {
        let sol = beltrami_solve(&BeltramiProblem::new(alpha.clone(), smooth_test_function(&g, seed)))
            .unwrap();
        assert!(sol.ratio <= 0.3 * 1.05, "{}", sol.ratio);
        assert!(sol.residuals.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn estimate_exponents_for_constant_input() {
    let g = disc(256);
    let one = Field::constant(g, C64::new(1.0, 0.0));
    for p in [3.0, 4.0, 8.0] {
        let r = verify_cauchy_estimates(&one, p, None).unwrap();
        assert!((r.fitted_exponent - (1.0 - 2.0 / p)).abs() <= 0.1, "{r:?}");
        assert!(r.holder_check.unwrap().is_finite());
    }
}
