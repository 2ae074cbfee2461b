use std::sync::Arc;

use dbar_core::grid::{ComplexGrid, Domain, Field, OneForm};
use dbar_core::zeroset::{
    count_zeros_slice, dbar_closedness_test, discriminant_h, distance_comparison,
    track_zero_graphs, weierstrass_reconstruct, winding_around, Contour,
};
use dbar_core::C64;
use proptest::prelude::*;

fn polydisc(radii: [f64; 2], shape: [usize; 4]) -> Arc<ComplexGrid> {
    Arc::new(ComplexGrid::build_with_shape(Domain::polydisc(radii), &shape).unwrap())
}

#[test]
fn square_root_branches_and_reconstruction() {
    let g = polydisc([0.25, 0.8], [17, 17, 129, 129]);
    let f = Field::from_fn(g, |p| p[1].conj().exp() * (p[1] * p[1] - p[0]));
    let chart = track_zero_graphs(&f, 0.7).unwrap();
    assert_eq!(chart.n, 2);
    for s in &chart.slices {
        assert_eq!(s.expanded().len(), 2);
        let w = s.z1.sqrt();
        let r = s.expanded();
        let err = ((r[0] - w).norm() + (r[1] + w).norm()).min((r[0] + w).norm() + (r[1] - w).norm());
        assert!(err < 1e-4, "slice {} at {}: {:?}", s.index, s.z1, r);
    }

    let h = discriminant_h(&chart);
    let p = weierstrass_reconstruct(&chart).unwrap();
    assert_eq!(p.degree, 2);
    let mut checked = 0;
    for s in &chart.slices {
        if s.z1.norm() < 1e-12 {
            assert_eq!(h.at(s.index), C64::new(0.0, 0.0));
            continue;
        }
        checked += 1;
        assert!((h.at(s.index) + 4.0 * s.z1).norm() < 1e-6);
        assert!(p.coefficients[0].at(s.index).norm() < 1e-6);
        assert!((p.coefficients[1].at(s.index) + s.z1).norm() < 1e-6);
        for r in s.expanded() {
            assert!(p.eval(s.index, r).unwrap().norm() < 1e-6);
        }
    }
    assert!(checked > 100);
    assert!(p.dbar_residuals.iter().all(|&r| r < 1e-6), "{:?}", p.dbar_residuals);
}

#[test]
fn linear_graph_distance_ratio() {
    let g = polydisc([0.25, 0.5], [33, 33, 65, 65]);
    let f = Field::from_fn(g, |p| p[1].conj().exp() * (p[1] - p[0]));
    let chart = track_zero_graphs(&f, 0.4).unwrap();
    assert_eq!(chart.n, 1);
    for s in &chart.slices {
        assert!((s.roots[0].z - s.z1).norm() < 1e-6);
    }
    let cmp = distance_comparison(&f, &chart).unwrap();
    assert!(cmp.ordered);
    let sqrt2 = std::f64::consts::SQRT_2;
    assert!((cmp.c1 / sqrt2 - 1.0).abs() <= 0.02, "{}", cmp.c1);
}

#[test]
fn cutoff_pairings_separate_closed_and_jump_forms() {
    let g = polydisc([0.25, 0.25], [41, 41, 41, 41]);
    let f = Field::from_fn(g.clone(), |p| p[1] * p[1].conj().exp());
    let chart = track_zero_graphs(&f, 0.2).unwrap();
    let eps = [0.2, 0.1, 0.05];
    let zero = Field::zeros(g.clone(), 1, 1);
    let one = Field::constant(g.clone(), C64::new(1.0, 0.0));
    // ∂̄f/f for f = z2 e^{z̄2}: the pairings vanish identically
    let along = OneForm::new(vec![zero.clone(), one.clone()]).unwrap();
    let r = dbar_closedness_test(&along, &chart, &eps, 4).unwrap();
    assert!(r.pass && r.vanishing, "{r:?}");
    // ∂̄f/f for f = z2 e^{z̄1}: bounded, so the decay exponent is at least 1
    let across = OneForm::new(vec![one, zero.clone()]).unwrap();
    let r = dbar_closedness_test(&across, &chart, &[0.1, 0.08, 0.065, 0.05], 4).unwrap();
    assert!(!r.vanishing && r.pairings.windows(2).all(|w| w[1] < w[0]), "{r:?}");
    assert!(r.decay_exponent.unwrap() >= 1.0 - 0.2, "{r:?}");

    let h = g.var_spacing(1);
    let sign = Field::from_fn(g.clone(), move |p| {
        if p[1].norm() < 0.5 * h {
            C64::new(0.0, 0.0)
        } else {
            p[1] / p[1].norm()
        }
    });
    let jump = OneForm::new(vec![sign, zero.clone()]).unwrap();
    let r = dbar_closedness_test(&jump, &chart, &eps, 4).unwrap();
    assert!(!r.pass, "{r:?}");

    let nothing = OneForm::new(vec![zero.clone(), zero]).unwrap();
    let r = dbar_closedness_test(&nothing, &chart, &eps, 2).unwrap();
    assert!(r.pairings.iter().all(|&p| p == 0.0));
}

fn line_grid() -> Arc<ComplexGrid> {
    Arc::new(ComplexGrid::build(Domain::unit_disc(), 97).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quadrisection_is_additive(
        roots in prop::collection::vec((-0.6f64..0.6, -0.6f64..0.6), 1..4),
        sx in 0.3f64..0.7,
        sy in 0.3f64..0.7,
    ) {
        let rs: Vec<C64> = roots.iter().map(|&(x, y)| C64::new(x, y)).collect();
        let f = Field::from_fn(line_grid(), move |p| rs.iter().map(|&r| p[0] - r).product());
        let (lo, side) = (C64::new(-0.8, -0.8), 1.6);
        let (ax, ay) = (sx * side, sy * side);
        let kids = [
            (lo, C64::new(ax, ay)),
            (lo + C64::new(ax, 0.0), C64::new(side - ax, ay)),
            (lo + C64::new(0.0, ay), C64::new(ax, side - ay)),
            (lo + C64::new(ax, ay), C64::new(side - ax, side - ay)),
        ];
        let whole = winding_around(&f, Contour::Square { lo, side }).unwrap();
        prop_assert_eq!(whole, roots.len() as i64);
        let parts: Result<Vec<i64>, _> = kids
            .iter()
            .map(|&(lo, size)| winding_around(&f, Contour::Rect { lo, size }))
            .collect();
        // a root on a cut line makes the split inadmissible, not wrong
        if let Ok(parts) = parts {
            prop_assert_eq!(parts.iter().sum::<i64>(), whole);
        }
    }

    #[test]
    fn nonvanishing_factor_preserves_slice_roots(
        roots in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..3),
    ) {
        let rs: Vec<C64> = roots.iter().map(|&(x, y)| C64::new(x, y)).collect();
        let g = line_grid();
        let h = g.max_spacing();
        let r1 = rs.clone();
        let plain = Field::from_fn(g.clone(), move |p| r1.iter().map(|&r| p[0] - r).product());
        let twisted = Field::from_fn(g, move |p| {
            p[0].conj().exp() * rs.iter().map(|&r| p[0] - r).product::<C64>()
        });
        if let (Ok(a), Ok(b)) = (count_zeros_slice(&plain, 0.8), count_zeros_slice(&twisted, 0.8)) {
            prop_assert_eq!(a.n, b.n);
            let (ea, eb) = (a.expanded(), b.expanded());
            for z in &ea {
                prop_assert!(eb.iter().any(|w| (w - z).norm() <= 2.0 * h));
            }
        }
    }
}
