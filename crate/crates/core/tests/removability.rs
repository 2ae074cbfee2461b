use std::sync::Arc;

use dbar_core::grid::{ComplexGrid, Domain, Field};
use dbar_core::removability::{
    disc_family, jhol_residual, poisson_extend, rado_subharmonic, riesz_decompose,
    theorem_b_pipeline, AlmostComplexStructure, ChirkaPotential, PolarSetSpec, TestDisc, Verdict,
};
use dbar_core::transforms::dzbar;
use dbar_core::{DbarError, C64};

fn unit(res: usize) -> Arc<ComplexGrid> {
    Arc::new(ComplexGrid::build(Domain::unit_disc(), res).unwrap())
}

fn origin() -> PolarSetSpec {
    PolarSetSpec::finite(vec![C64::new(0.0, 0.0)])
}

fn real(g: &Arc<ComplexGrid>, f: impl Fn(C64) -> f64 + Sync) -> Field {
    Field::from_fn(g.clone(), move |p| C64::new(f(p[0]), 0.0))
}

#[test]
fn rado_examples() {
    let g = unit(96);
    let r = rado_subharmonic(&real(&g, |z| z.norm_sqr()), &origin());
    assert!(r.pass, "{r:?}");
    let r = rado_subharmonic(&real(&g, |z| z.re), &origin());
    assert!(r.pass, "{r:?}");
    let r = rado_subharmonic(&real(&g, |z| -z.norm()), &origin());
    assert!(!r.pass);
    assert!(r.violations > 0);
    // Δ(−|z|) = −1/|z|
    let p = r.worst_point.unwrap();
    assert!(r.worst_laplacian < -0.5 / p.norm(), "{} at {p}", r.worst_laplacian);
    assert!(r.limit_gap < 1e-2);
}

#[test]
fn poisson_reproduces_harmonic_witnesses() {
    let g = unit(128);
    let c = C64::new(0.0, 0.0);
    let ext = poisson_extend(&real(&g, |z| z.re), &origin(), c, 0.9).unwrap();
    assert!(ext.sup_error_off_e <= 1e-8, "{}", ext.sup_error_off_e);
    assert!(ext.nodes >= 720);

    let five = PolarSetSpec::finite(vec![
        C64::new(0.1, 0.2),
        C64::new(-0.3, 0.05),
        C64::new(0.4, -0.4),
        C64::new(-0.2, -0.5),
        C64::new(0.0, 0.6),
    ]);
    let ext = poisson_extend(&real(&g, |z| (1.0 / (z - 2.0)).re), &five, c, 0.9).unwrap();
    assert!(ext.sup_error_off_e <= 1e-6, "{}", ext.sup_error_off_e);
    // filled cells on E carry the harmonic value
    for i in (0..g.len()).filter(|&i| five.markers(&g)[i]) {
        assert!((ext.field.at(i).re - (1.0 / (g.z(i) - 2.0)).re).abs() < 1e-6);
    }

    let quartic = |z: C64| (z * z * z * z + C64::new(0.0, 0.5) * z * z * z - 0.3 * z).re + 0.2;
    let ext = poisson_extend(&real(&g, quartic), &origin(), c, 0.9).unwrap();
    assert!(ext.sup_error_off_e <= 1e-8, "{}", ext.sup_error_off_e);

    assert!(matches!(
        poisson_extend(&real(&g, |z| z.norm().ln()), &origin(), c, 0.9),
        Err(DbarError::BoundednessViolation(_))
    ));
}

#[test]
fn riesz_of_the_square_modulus() {
    let g = unit(128);
    let d = riesz_decompose(&real(&g, |z| z.norm_sqr()), &origin()).unwrap();
    let area = g.cell_volume();
    // Δ|z|² = 4 is exact for the five-point stencil
    let cells = d.mu.iter().filter(|&&m| m > 0.0).count() as f64;
    assert!((d.total_mass / (4.0 * area * cells) - 1.0).abs() < 1e-9);
    assert!((d.flux / d.total_mass - 1.0).abs() < 0.01);
    assert!(d.e_mass <= d.single_cell_mass * (1.0 + 1e-9));
    assert!(d.harmonic_residual < 1e-2, "{}", d.harmonic_residual);
    let harm = riesz_decompose(&real(&g, |z| (z * z).re), &origin()).unwrap();
    assert!(harm.total_mass.abs() < 1e-9);
    assert!(matches!(
        riesz_decompose(&real(&g, |z| -z.norm_sqr()), &origin()),
        Err(DbarError::NotSubharmonic { .. })
    ));
}

#[test]
fn riesz_mass_avoids_the_pole() {
    let mut e_mass = Vec::new();
    for res in [128, 256] {
        let g = unit(res);
        let d = riesz_decompose(&real(&g, |z| z.norm().ln().max(-5.0)), &origin()).unwrap();
        assert!(d.e_mass <= d.single_cell_mass * (1.0 + 1e-9));
        // the discrete log stencil leaves small negative masses around the pole
        assert!((d.flux / d.signed_mass - 1.0).abs() < 1e-9);
        assert!((d.flux / (2.0 * std::f64::consts::PI) - 1.0).abs() < 0.01);
        e_mass.push(d.e_mass);
    }
    assert!(e_mass[1] < e_mass[0]);
}

#[test]
fn chirka_is_plurisubharmonic_along_discs() {
    let p = vec![C64::new(0.0, 0.0); 2];
    let curve = TestDisc::through(&p, vec![
        vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
    ]);
    let rho = ChirkaPotential::new(p.clone(), 5.0).unwrap();
    let r = rho.psh_report(&[curve], 64).unwrap();
    assert!(r.pass && r.min_laplacian >= -1e-6, "{r:?}");
    let center = vec![C64::new(0.1, -0.2), C64::new(0.3, 0.0)];
    let family = disc_family(&center, 20, 7);
    for a in [0.0, 1.0, 5.0, 10.0] {
        let r = ChirkaPotential::new(center.clone(), a).unwrap().psh_report(&family, 48).unwrap();
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn jhol_residual_examples() {
    let g = unit(128);
    let hol = Field::from_fn_matrix(g.clone(), 2, 1, |p, out| {
        out[0] = p[0];
        out[1] = p[0] * p[0] - 0.3;
    });
    let plain = jhol_residual(&hol, &AlmostComplexStructure::standard(2)).unwrap();
    assert_eq!(plain.residual.values(), dzbar(&hol, 0).values());

    let j = AlmostComplexStructure::scaled_coordinate(2, 0.1, 1).unwrap();
    let c2 = C64::new(3.0, 0.0);
    let q = 0.1 * c2;
    let f = |z: C64| 0.5 * z * z + C64::new(0.2, 0.1) * z;
    let v = Field::from_fn_matrix(g.clone(), 2, 1, move |p, out| {
        out[0] = f(p[0]) + q * f(p[0]).conj();
        out[1] = c2;
    });
    let r = jhol_residual(&v, &j).unwrap();
    assert!(r.max_residual <= 1e-8, "{}", r.max_residual);

    let v2 = Field::from_fn_matrix(g.clone(), 2, 1, |p, out| {
        out[0] = p[0];
        out[1] = p[0].conj().powi(3);
    });
    let r = jhol_residual(&v2, &j).unwrap();
    // Lip(Q) = 0.1 and |∂v₂| = 1
    assert!(r.c_max <= 0.1 * (1.0 + 1e-6), "{}", r.c_max);
}

#[test]
fn pipeline_verdicts() {
    let g = unit(128);
    let e = PolarSetSpec::finite(vec![C64::new(0.0, 0.0), C64::new(0.3, 0.0)]);
    let sq = Field::from_fn(g.clone(), |p| p[0] * p[0]);
    let r = theorem_b_pipeline(&sq, &e, &AlmostComplexStructure::standard(1)).unwrap();
    assert_eq!(r.verdict, Verdict::Removable, "{r:?}");
    assert!(r.final_residual <= r.stencil_tolerance);

    let bar = Field::from_fn(g.clone(), |p| p[0].conj());
    let r = theorem_b_pipeline(&bar, &origin(), &AlmostComplexStructure::standard(1)).unwrap();
    assert_eq!(r.verdict, Verdict::NotRemovable);
    assert!((r.final_residual - 1.0).abs() < 1e-9);
    assert!(r.required_c0.map_or(true, |c| c >= 1.0));

    let empty = theorem_b_pipeline(&sq, &PolarSetSpec::empty(), &AlmostComplexStructure::standard(1)).unwrap();
    assert_eq!(empty.verdict, Verdict::Removable);

    let j = AlmostComplexStructure::scaled_coordinate(2, 0.1, 1).unwrap();
    let c2 = C64::new(3.0, 0.0);
    let q = 0.1 * c2;
    let f = |z: C64| 0.5 * z * z + C64::new(0.2, 0.1) * z + 0.1;
    let v = Field::from_fn_matrix(g.clone(), 2, 1, move |p, out| {
        out[0] = f(p[0]) + q * f(p[0]).conj();
        out[1] = c2;
    });
    let r = theorem_b_pipeline(&v, &e, &j).unwrap();
    assert_eq!(r.verdict, Verdict::Removable, "{r:?}");
    assert!(r.final_residual <= 10.0 * r.stencil_tolerance);
    assert!((r.beltrami[0].c0 - 0.3).abs() < 1e-9);
    assert!(r.beltrami[0].ratio <= 0.3 * 1.05, "{:?}", r.beltrami);
}
