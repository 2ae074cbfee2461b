use std::f64::consts::PI;
use std::sync::Arc;

use dbar_core::factor::{
    check_isolated_zeros, coefficient_bound, counterexample_field, dbar_log_coefficient,
    integrating_factor_matrix, integrating_factor_scalar, manufactured_system,
    trivial_extension, ContractionParams,
};
use dbar_core::grid::{ComplexGrid, Domain, Field, OneForm};
use dbar_core::transforms::dzbar;
use dbar_core::zeroset::winding_number;
use dbar_core::{DbarError, C64};

fn disc(r: f64, res: usize) -> Arc<ComplexGrid> {
    Arc::new(ComplexGrid::build(Domain::disc(C64::new(0.0, 0.0), r), res).unwrap())
}

fn constant_form(g: &Arc<ComplexGrid>, rows: usize, a: C64) -> OneForm {
    let coef = Field::from_fn_matrix(g.clone(), rows, rows, move |_, out| {
        for r in 0..rows {
            out[r * rows + r] = a;
        }
    });
    OneForm::single(coef).unwrap()
}

#[test]
fn scalar_factor_removes_the_antiholomorphic_exponential() {
    let g = disc(1.0, 128);
    let f = Field::from_fn(g.clone(), |p| p[0].conj().exp() * (p[0] - 0.2));
    let a = constant_form(&g, 1, C64::new(1.0, 0.0));
    let params = ContractionParams::new(4.0, 1.0, 1.0, 1.0, 1).unwrap();
    let out = integrating_factor_scalar(&f, &a, &params).unwrap();
    // T of the disc indicator is z̄ inside
    let mut worst = 0.0f64;
    for i in 0..g.len() {
        let z = g.z(i);
        if z.norm() < 0.8 {
            worst = worst.max((out.u.at(i) - z.conj()).norm());
            worst = worst.max((out.factor.at(i) - (z - 0.2)).norm());
        }
    }
    assert!(worst < 1e-3, "{worst}");
    assert!(out.dbar_residual < 1e-3, "{}", out.dbar_residual);
    let zeros = check_isolated_zeros(&f, &out.factor);
    assert_eq!(zeros.zeros.len(), 1);
    assert!((zeros.zeros[0] - C64::new(0.2, 0.0)).norm() <= g.max_spacing());
    assert_eq!(zeros.multiplicities, vec![1]);
    assert!(zeros.isolated);
}

#[test]
fn diagonal_system_decouples_into_scalar_factors() {
    let g = disc(0.5, 96);
    let a = C64::new(0.15, -0.05);
    let f = Field::from_fn_matrix(g.clone(), 2, 1, |p, out| {
        out[0] = p[0] - 0.1;
        out[1] = C64::new(1.0, 0.0);
    });
    let form = constant_form(&g, 2, a);
    let params = ContractionParams::calibrated(4.0, &form).unwrap();
    let m = integrating_factor_matrix(&f, &form, &params).unwrap();
    let scalar_params = ContractionParams::calibrated(4.0, &constant_form(&g, 1, a)).unwrap();
    let s = integrating_factor_scalar(&f.component(0, 0), &constant_form(&g, 1, a), &scalar_params)
        .unwrap();
    let mut diag = 0.0f64;
    let mut off = 0.0f64;
    for i in 0..g.len() {
        if !g.center_inside(i) {
            continue;
        }
        let c = m.g.cell(i);
        let e = (-s.u.at(i)).exp();
        diag = diag.max((c[0] + 1.0 - e).norm()).max((c[3] + 1.0 - e).norm());
        off = off.max(c[1].norm()).max(c[2].norm());
    }
    // the discrete fixed point and e^{-u} differ by discretisation only
    assert!(diag < 1e-5, "{diag}");
    assert_eq!(off, 0.0);
}

#[test]
fn convergence_ratio_respects_the_contraction_bound() {
    let g = disc(0.5, 128);
    let form = constant_form(&g, 1, C64::new(0.1, 0.0));
    let f = Field::from_fn(g.clone(), |p| p[0] + 0.3);
    let params = ContractionParams::calibrated(4.0, &form).unwrap();
    // ‖0.1‖ on the disc
    let m_exact = 0.1 * (PI * 0.25f64).powf(0.25);
    assert!((params.m_bound / m_exact - 1.0).abs() < 1e-12);
    let r = integrating_factor_matrix(&f, &form, &params).unwrap();
    assert!(r.fixed_point_residual <= 1e-8);
    assert!(r.g_norm <= r.g_bound);
    let ratio = r.convergence_ratio.unwrap();
    assert!(ratio <= r.g_bound, "{ratio} vs {}", r.g_bound);
}

#[test]
fn manufactured_systems_converge_and_keep_their_zeros() {
    let mut residuals = Vec::new();
    for res in [64, 128] {
        let g = disc(0.5, res);
        let s = manufactured_system(&g, 11, 0.06).unwrap();
        let params = ContractionParams::calibrated(4.0, &s.a).unwrap();
        let r = integrating_factor_matrix(&s.f, &s.a, &params).unwrap();
        assert!(r.fixed_point_residual <= 1e-8);
        assert!(r.g_norm <= r.g_bound);
        residuals.push(r.dbar_residual);
        let f0 = s.f.component(0, 0);
        let big0 = r.factor.component(0, 0);
        for c in [C64::new(0.0, 0.0)].iter().chain(&s.zeros) {
            let rad = if c.norm() == 0.0 { 0.4 } else { 0.05 };
            assert_eq!(
                winding_number(&f0, *c, rad).unwrap(),
                winding_number(&big0, *c, rad).unwrap()
            );
        }
        assert_eq!(winding_number(&big0, C64::new(0.0, 0.0), 0.4).unwrap(), s.zeros.len() as i64);
    }
    let order = (residuals[0] / residuals[1]).log2();
    assert!(order >= 1.0, "{residuals:?}");
}

#[test]
fn scalar_and_matrix_paths_agree_for_one_equation() {
    let g = disc(0.5, 96);
    let coef = Field::from_fn(g.clone(), |p| 0.1 * p[0].conj() + 0.05);
    let form = OneForm::single(coef.clone()).unwrap();
    let f = Field::from_fn(g.clone(), |p| (p[0] - 0.15) * (0.05 * p[0].norm_sqr() + 0.1 * p[0].conj()).exp());
    let params = ContractionParams::calibrated(4.0, &form).unwrap();
    let m = integrating_factor_matrix(&f, &form, &params).unwrap();
    let s = integrating_factor_scalar(&f, &form, &params).unwrap();
    let ratio = s.factor.zip_map(&m.factor, |a, b| if b.norm() > 1e-3 { a / b } else { C64::new(1.0, 0.0) }).unwrap();
    let d = dzbar(&ratio, 0);
    let mut worst = 0.0f64;
    let mut min_mod = f64::INFINITY;
    for i in 0..g.len() {
        let z = g.z(i);
        if z.norm() < 0.35 && (z - 0.15).norm() > 0.05 {
            worst = worst.max(d.at(i).norm());
            min_mod = min_mod.min(ratio.at(i).norm());
        }
    }
    assert!(worst < 1e-3, "{worst}");
    assert!(min_mod > 0.5);
}

#[test]
fn low_exponent_requests_are_rejected() {
    assert!(matches!(
        ContractionParams::new(2.0, 0.5, 1.0, 1.0, 1),
        Err(DbarError::UnsupportedExponent(_))
    ));
}

#[test]
fn trivial_extension_of_a_line_zero_set() {
    let r = 0.5;
    let g = Arc::new(ComplexGrid::build(Domain::polydisc([r, r]), 33).unwrap());
    let f = Field::from_fn(g.clone(), |p| p[1] * p[1].conj().exp());
    let a = dbar_log_coefficient(&f).unwrap();
    // uniform L^4 bound of the constant 1 on a line
    let m = (PI * r * r).powf(0.25);
    let ext = trivial_extension(&f, &a, 4.0, m).unwrap();
    let h = g.max_spacing();
    for i in 0..g.len() {
        let p = g.point(i);
        if g.center_inside(i) && p[1].norm() > 4.0 * h {
            assert!(ext.b.component(0).at(i).norm() < 1e-12);
            assert!((ext.b.component(1).at(i) - 1.0).norm() < 1e-2);
        }
    }
    let rep = &ext.report;
    assert!(!rep.violation, "{:?}", rep.checks);
    assert!(!rep.checks.is_empty());
    for c in &rep.checks {
        if (c.eps - 4.0 * h).abs() < 1e-12 {
            assert!((c.ratio - 1.0).abs() <= 0.1, "{c:?}");
        }
    }
    assert!((rep.measured_line_bound / m - 1.0).abs() < 0.02);
}

/// `‖−1/(2 z̄ log|z|)‖_{L^p(ρ<|z|<1/2)}` by the substitution `t = −log r`:
/// `(2π / 2^p) ∫ e^{(p−2) t} t^{−p} dt` over `[log 2, −log ρ]`.
fn radial_norm(p: f64, rho: f64) -> f64 {
    let (a, b) = (2f64.ln(), -rho.ln());
    let n = 20_000;
    let h = (b - a) / n as f64;
    let g = |t: f64| ((p - 2.0) * t).exp() * t.powf(-p);
    let mut s = g(a) + g(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * g(a + k as f64 * h);
    }
    (2.0 * PI / 2f64.powf(p) * s * h / 3.0).powf(1.0 / p)
}

#[test]
fn counterexample_norms_match_the_radial_integral() {
    let g = disc(0.5, 256);
    let c = counterexample_field(0, &g).unwrap();
    for &p in &[2.0, 3.0] {
        let row = c.table.row(p).unwrap();
        for (j, &rho) in c.table.rhos.iter().enumerate() {
            let want = radial_norm(p, rho);
            let tol = if rho < 4.0 * g.max_spacing() { 0.05 } else { 0.01 };
            assert!((row[j] / want - 1.0).abs() < tol, "p {p} ρ {rho}: {} vs {want}", row[j]);
        }
    }
    assert!(c.table.cauchy_like(2.0));
    assert!(c.table.unbounded_growth(3.0));
    assert!(c.max_modulus <= c.core_bound);
}

#[test]
fn counterexample_zeros_accumulate_at_the_origin() {
    let g = disc(0.5, 256);
    let c = counterexample_field(50, &g).unwrap();
    assert!(c.vanishes_at_poles);
    assert!(c.max_modulus_core <= c.core_bound);
    let z = check_isolated_zeros(&c.f, &c.f);
    assert!(z.accumulation && !z.isolated);
    assert!(z.cluster_points.iter().any(|p| p.norm() < 2.0 * g.max_spacing()));
    assert!(coefficient_bound(&c.a, 2.0).unwrap().is_finite());
}
