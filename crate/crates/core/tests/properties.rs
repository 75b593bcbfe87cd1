use proptest::prelude::*;
use thermoform::cli::ExperimentConfig;
use thermoform::dynamics::{CircleMap, MapSystem, Point};
use thermoform::operator::{build, leading_eigentriple, Discretization, EigenOptions};
use thermoform::oracle::{closed_form_pressure_pl, pressure_preimage_sum};
use thermoform::potentials::{flatten, Potential, TrigTerm};
use thermoform::thermo::{pressure_sweep, uniform_grid, SweepOptions};

fn doubling() -> MapSystem {
    CircleMap::doubling().into()
}

fn pressure(map: &MapSystem, phi: &Potential, n: usize) -> f64 {
    let op = build(map, phi, &Discretization::collocation(n)).unwrap();
    leading_eigentriple(&op, &EigenOptions::default()).unwrap().pressure
}

fn trig(a: f64, b: f64) -> Potential {
    Potential::trig_poly(
        0.0,
        vec![TrigTerm { freq: vec![1], cos: a, sin: 0.0 }, TrigTerm { freq: vec![2], cos: 0.0, sin: b }],
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn preimages_map_back(x in 0.0f64..1.0, alpha in 0.1f64..1.0) {
        for f in [CircleMap::doubling(), CircleMap::manneville_pomeau(alpha).unwrap()] {
            let pre = f.preimages(x).unwrap();
            prop_assert_eq!(pre.len(), f.branch_count());
            for y in pre {
                let back = f.eval(y);
                prop_assert!(thermoform::dynamics::circle_distance(back, x) < 1e-12);
            }
        }
    }

    #[test]
    fn adding_a_constant_shifts_pressure(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -3.0f64..3.0) {
        let d = doubling();
        let phi = trig(a, b);
        let p = pressure(&d, &phi, 32);
        let q = pressure(&d, &phi.shifted(c), 32);
        prop_assert!((q - p - c).abs() < 1e-10);
    }

    #[test]
    fn pressure_is_monotone_and_lipschitz(a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.0f64..0.5) {
        let d = doubling();
        let phi = trig(a, b);
        let p = pressure(&d, &phi, 32);
        let q = pressure(&d, &phi.shifted(c), 32);
        prop_assert!(q >= p - 1e-12);
        let norm = a.abs() + b.abs();
        let p1 = pressure(&d, &phi.scaled(1.0), 32);
        let p2 = pressure(&d, &phi.scaled(1.5), 32);
        prop_assert!((p2 - p1).abs() <= 0.5 * norm + 1e-9);
    }

    #[test]
    fn sweeps_are_convex(a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let t = uniform_grid(-2.0, 2.0, 21);
        let curve = pressure_sweep(&doubling(), &trig(a, b), &t, &Discretization::collocation(32), &SweepOptions { gap: false, ..Default::default() }).unwrap();
        let checks = curve.checks(1e-6);
        prop_assert!(checks.convex_ok, "{:?}", checks);
        prop_assert!(checks.lipschitz_ok, "{:?}", checks);
    }

    #[test]
    fn pl_closed_form_matches_operator(s1 in 2.0f64..4.0, s2 in 2.0f64..4.0, t in -2.0f64..2.0) {
        prop_assume!(1.0 / s1 + 1.0 / s2 <= 1.0);
        let f: MapSystem = CircleMap::piecewise_linear(&[s1, s2]).unwrap().into();
        let phi = thermoform::potentials::geometric_potential(&f, thermoform::potentials::GeometricScope::Full).unwrap();
        let p = pressure(&f, &phi.scaled(t), 32);
        prop_assert!((p - closed_form_pressure_pl(&[s1, s2], t).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn constant_potentials_have_exact_preimage_pressure(c in -2.0f64..2.0, x in 0.0f64..1.0) {
        let p = pressure_preimage_sum(&doubling(), &Potential::constant(c), &Point::on_circle(x), 10, 1 << 20).unwrap();
        prop_assert!((p - 2f64.ln() - c).abs() < 1e-12);
    }

    #[test]
    fn flatten_is_idempotent(k in 2i32..6, x in 0.0f64..1.0, y in 0.0f64..1.0) {
        let f: MapSystem = thermoform::dynamics::SkewProduct::new(
            thermoform::dynamics::Base::Circle(CircleMap::doubling()),
            thermoform::dynamics::FiberFamily::Constant { map: thermoform::dynamics::CircleKind::Lsv { alpha: 0.5 } },
        ).unwrap().into();
        let phi = Potential::trig_poly(0.0, vec![TrigTerm { freq: vec![1, 1], cos: 1.0, sin: 0.5 }]);
        let eps = 0.5f64.powi(k);
        let once = flatten(&phi, eps, &f).unwrap();
        let twice = flatten(&once, eps, &f).unwrap();
        let p = Point::new(&[x, y]);
        prop_assert_eq!(once.eval(&p).to_bits(), twice.eval(&p).to_bits());
    }

    #[test]
    fn config_round_trip(min in -5.0f64..0.0, width in 0.1f64..5.0, steps in 3usize..200, n in 8usize..256) {
        let text = format!(
            r#"{{"map": {{"kind": "circle", "family": {{"kind": "linear", "multiplier": 3}}}},
                "potential": {{"kind": "cosine"}}, "scheme": "ulam", "n": [{n}],
                "t": {{"min": {min}, "max": {}, "steps": {steps}}}}}"#,
            min + width
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let again = ExperimentConfig::parse(&cfg.to_json().unwrap()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.t_grid().len(), steps);
    }
}
