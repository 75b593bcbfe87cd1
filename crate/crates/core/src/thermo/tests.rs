use super::*;
use crate::dynamics::{Base, CircleKind, CircleMap, FiberFamily, Point, SkewProduct};
use crate::operator::{Basis, Discretization, EigenOptions};
use crate::oracle::closed_form_pressure_pl;
use crate::potentials::{geometric_potential, GeometricScope, TrigTerm};
use std::f64::consts::{LN_2, PI};

fn doubling() -> MapSystem {
    CircleMap::doubling().into()
}

fn pl() -> MapSystem {
    CircleMap::piecewise_linear(&[2.0, 3.0]).unwrap().into()
}

fn mp() -> MapSystem {
    CircleMap::manneville_pomeau(0.5).unwrap().into()
}

fn tm2() -> MapSystem {
    SkewProduct::new(
        Base::Circle(CircleMap::doubling()),
        FiberFamily::Constant { map: CircleKind::Lsv { alpha: 0.5 } },
    )
    .unwrap()
    .into()
}

fn no_gap() -> SweepOptions {
    SweepOptions { gap: false, ..Default::default() }
}

#[test]
fn affine_sweep_for_constant_potential() {
    let t = uniform_grid(-2.0, 2.0, 9);
    let c = pressure_sweep(&doubling(), &Potential::constant(1.0), &t, &Discretization::collocation(32), &no_gap()).unwrap();
    for i in 0..c.len() {
        assert!((c.pressure[i] - LN_2 - t[i]).abs() < 1e-12);
        assert!((c.p_fd[i] - 1.0).abs() < 1e-10);
        assert!((c.p_mu[i] - 1.0).abs() < 1e-12);
        let h = entropy_via_legendre(&c, t[i]).unwrap();
        assert!((h - LN_2).abs() < 1e-10);
    }
    assert!(c.entropy_deviation.unwrap() < 1e-12);
    let checks = c.checks.as_ref().unwrap();
    assert!(checks.lipschitz_ok && checks.convex_ok);
    assert!(matches!(entropy_via_legendre(&c, 0.25), Err(Error::InvalidArgument(_))));
}

#[test]
fn piecewise_linear_closed_form_and_entropy() {
    let f = pl();
    let phi = geometric_potential(&f, GeometricScope::Full).unwrap();
    let t = uniform_grid(-3.0, 3.0, 13);
    let c = pressure_sweep(&f, &phi, &t, &Discretization::collocation(64), &no_gap()).unwrap();
    for (ti, p) in t.iter().zip(&c.pressure) {
        assert!((p - closed_form_pressure_pl(&[2.0, 3.0], *ti).unwrap()).abs() < 1e-6);
    }
    assert!((entropy_via_legendre(&c, 0.0).unwrap() - LN_2).abs() < 1e-6);
    let expected = (5.0f64 / 6.0).ln() + (0.5 * LN_2 + 3f64.ln() / 3.0) / (5.0 / 6.0);
    assert!((entropy_via_legendre(&c, 1.0).unwrap() - expected).abs() < 1e-6);
    for i in 0..c.len() {
        let h = entropy_via_legendre(&c, t[i]).unwrap();
        assert!((h + t[i] * c.p_mu[i] - c.pressure[i]).abs() < 1e-10);
    }
}

#[test]
fn sweep_rejects_unsorted_grid() {
    let r = pressure_sweep(&doubling(), &Potential::cosine(), &[0.0, 0.0], &Discretization::collocation(16), &no_gap());
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}

#[test]
fn max_entropy_measure_of_doubling() {
    let opts = EigenOptions::default();
    let disc = Discretization::collocation(32);
    let mu = equilibrium_state(&doubling(), &Potential::constant(0.0), &disc, &opts).unwrap();
    assert!(mu.weights().iter().all(|w| (w - 1.0 / 32.0).abs() < 1e-10));
    let mu_c = equilibrium_state(&doubling(), &Potential::constant(0.7), &disc, &opts).unwrap();
    for (a, b) in mu.weights().iter().zip(mu_c.weights()) {
        assert!((a - b).abs() < 1e-12);
    }
    let ly = lyapunov_exponents(&mu, &doubling());
    assert!((ly.lambda_min - LN_2).abs() < 1e-12);
    match expanding_on_average_certificate(&mu, &doubling(), 3).unwrap() {
        ExpansionCertificate::Certified { l, value } => assert!(l == 1 && (value - LN_2).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
}

#[test]
fn piecewise_linear_conformal_split() {
    let f = pl();
    let phi = geometric_potential(&f, GeometricScope::Full).unwrap();
    let mu = equilibrium_state(&f, &phi, &Discretization::collocation(64), &EigenOptions::default()).unwrap();
    assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    assert!(mu.weights().iter().all(|&w| w >= -1e-14));
    let left = mu.integrate(|p| if p.x() < 0.5 { 1.0 } else { 0.0 });
    assert!((left - 0.6).abs() < 0.05, "{left}");
    let ly = lyapunov_exponents(&mu, &f);
    let exact = 0.6 * LN_2 + 0.4 * 3f64.ln();
    assert!((ly.lambda_min - exact).abs() < 0.05, "{}", ly.lambda_min);
}

#[test]
fn equilibrium_invariance_on_trig_observables() {
    let d = doubling();
    let mu = equilibrium_state(&d, &Potential::cosine(), &Discretization::collocation(64), &EigenOptions::default()).unwrap();
    for k in 1..=8 {
        let kf = k as f64;
        let g = move |p: &Point| (2.0 * PI * kf * p.x()).cos();
        let defect = mu.invariance_defect(&d, g);
        assert!(defect.abs() <= mu.invariance_bound(2.0 * PI * kf, 2.0), "k={k} defect={defect:e}");
    }
}

#[test]
fn intermittent_equilibrium_and_point_mass() {
    let f = mp();
    let mu = equilibrium_state(&f, &Potential::constant(0.0), &Discretization::collocation(256), &EigenOptions::default()).unwrap();
    assert!(lyapunov_exponents(&mu, &f).lambda_min > 0.0);
    let delta = EquilibriumState::point_mass(Point::on_circle(0.0));
    match expanding_on_average_certificate(&delta, &f, 4).unwrap() {
        ExpansionCertificate::Failed { values } => assert!(values.iter().all(|v| v.abs() < 1e-15)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn preimage_measures() {
    let d = doubling();
    let mu = mme_preimage_measure(&d, &Point::on_circle(0.0), 10, 1 << 20).unwrap();
    assert!(mu.integrate(|p| (2.0 * PI * p.x()).cos()).abs() < 1e-12);
    assert!((lyapunov_exponents(&mu, &d).lambda_min - LN_2).abs() < 1e-12);
    let mu = mme_preimage_measure(&mp(), &Point::on_circle(0.5), 14, 1 << 20).unwrap();
    assert!(lyapunov_exponents(&mu, &mp()).lambda_min > 0.0);
    assert!(matches!(
        mme_preimage_measure(&d, &Point::on_circle(0.0), 40, 1 << 20),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn skew_product_exponents() {
    let f = tm2();
    let mu = mme_preimage_measure(&f, &Point::new(&[0.3, 0.6]), 7, 1 << 20).unwrap();
    let ly = lyapunov_exponents(&mu, &f);
    assert!((ly.base.unwrap().0 - LN_2).abs() < 1e-12);
    let fiber = ly.fiber.unwrap();
    assert!(fiber > 0.0 && (ly.lambda_min - fiber.min(LN_2)).abs() < 1e-12, "{ly:?}");
    match expanding_on_average_certificate(&mu, &f, 2).unwrap() {
        ExpansionCertificate::Certified { l: 1, value } => assert!((value - fiber.min(LN_2)).abs() < 0.2),
        other => panic!("{other:?}"),
    }
}

#[test]
fn skew_zero_potential_is_interior() {
    let t = uniform_grid(-1.0, 1.0, 3);
    let r = skew_boundary_analysis(&tm2(), &Potential::constant(0.0), &t, &Discretization::collocation(16), &no_gap()).unwrap();
    assert_eq!(r.boundaries.len(), 1);
    assert!(matches!(r.boundaries[0].kind, BoundaryKind::Fiber { index: 1, alpha } if alpha == 0.0));
    for k in 0..t.len() {
        assert!((r.full.pressure[k] - 4f64.ln()).abs() < 1e-10);
        assert!((r.boundaries[0].pressure[k] - LN_2).abs() < 1e-10);
        assert_eq!(r.labels[k], Dominance::Interior);
    }
    assert_eq!(r.full.label[0], "interior");
    assert!(skew_boundary_analysis(&doubling(), &Potential::constant(0.0), &t, &Discretization::collocation(16), &no_gap()).is_err());
}

#[test]
fn skew_margin_stays_nonnegative() {
    let phi = Potential::trig_poly(
        0.0,
        vec![
            TrigTerm { freq: vec![0, 1], cos: 1.0, sin: 0.0 },
            TrigTerm { freq: vec![1, 0], cos: 0.3, sin: 0.0 },
        ],
    );
    let t = uniform_grid(-2.0, 2.0, 5);
    let r = skew_boundary_analysis(&tm2(), &phi, &t, &Discretization::collocation(24), &no_gap()).unwrap();
    assert!(r.min_margin() >= -2.0 * r.scheme_tolerance, "{:?}", r.margin);
}

#[test]
fn smooth_expanding_scan_is_empty() {
    let t = uniform_grid(-4.0, 4.0, 17);
    let ladder: Vec<PressureCurve> = [32, 48]
        .iter()
        .map(|&n| pressure_sweep(&doubling(), &Potential::cosine(), &t, &Discretization::collocation(n), &SweepOptions::default()).unwrap())
        .collect();
    let scan = phase_transition_scan(&ladder, None).unwrap();
    assert!(scan.candidates.is_empty(), "{:?}", scan.candidates);
    assert_eq!(scan.analytic, vec![(-4.0, 4.0)]);
    assert!(matches!(phase_transition_scan(&ladder[..1], None), Err(Error::InsufficientRefinement(_))));
}

#[test]
fn affine_curve_is_not_frozen() {
    let t = uniform_grid(-2.0, 2.0, 17);
    let ladder: Vec<PressureCurve> = [16, 32]
        .iter()
        .map(|&n| pressure_sweep(&doubling(), &Potential::constant(1.0), &t, &Discretization::collocation(n).with_basis(Basis::PiecewiseLinear), &SweepOptions::default()).unwrap())
        .collect();
    assert!(phase_transition_scan(&ladder, None).unwrap().candidates.is_empty());
}

#[test]
fn variational_dominance_of_periodic_orbits() {
    let c = pressure_sweep(&doubling(), &Potential::cosine(), &[1.0], &Discretization::collocation(64), &no_gap()).unwrap();
    let best = max_periodic_average(&doubling(), &Potential::cosine(), 8, 1 << 20).unwrap();
    assert!((best - 1.0).abs() < 1e-12);
    assert!(best <= c.pressure[0] + 1e-8);
}

#[test]
fn high_temperature_gap_on_doubling() {
    let r = gap_onset_scan(&doubling(), &Potential::cosine(), Direction::HighTemp, 2.0, 3, &Discretization::collocation(32), &SweepOptions::default()).unwrap();
    assert_eq!(r.t.len(), 5);
    assert_eq!(r.threshold, Some(2.0), "{r:?}");
    let r = gap_onset_scan(&doubling(), &Potential::cosine(), Direction::LowTemp, 4.0, 3, &Discretization::collocation(32), &SweepOptions::default()).unwrap();
    assert_eq!(r.t, vec![1.0, 2.0, 4.0]);
    assert_eq!(r.threshold, Some(1.0), "{r:?}");
}
