//! Geometry and flow through the public API.

use qkflow::expr::Expr;
use qkflow::flow::{self, SolitonData};
use qkflow::scenarios;
use qkflow::StructureKind;

fn builtin(name: &str) -> scenarios::Scenario {
    scenarios::builtin(name).unwrap().prepared().unwrap()
}

#[test]
fn hh2_is_einstein_with_negative_constant_for_every_rotation() {
    let s = builtin("hh2_rotated");
    let mut lambdas = Vec::new();
    for phi in [0.0, 0.4, 1.1, 2.0] {
        let ric = s.geometry::<f64>(&[phi]).unwrap().curvature().ricci();
        let lambda = ric[0][0];
        for (a, row) in ric.iter().enumerate() {
            for (b, r) in row.iter().enumerate() {
                assert!((r - if a == b { lambda } else { 0.0 }).abs() < 1e-12);
            }
        }
        lambdas.push(lambda);
    }
    assert!(lambdas[0] < 0.0);
    assert!(lambdas.iter().all(|l| (l - lambdas[0]).abs() < 1e-12));
}

#[test]
fn spin7_conformal_torus_is_harmonic_but_not_torsion_free() {
    let s = scenarios::torus_conformal(Expr::parse("3 + cos(x1)").unwrap(), StructureKind::Spin7).prepared().unwrap();
    for x in [0.2, 1.3, 2.9] {
        let g = s.geometry_jet(&[x], false).unwrap();
        assert!(g.energy_density().value > 1e-4);
        assert!(g.divergence().map(|j| j.value).max_abs() < 1e-12);
        for t in g.torsion() {
            assert!((g.project_m(t) - t.clone()).map(|j| j.value).max_abs() < 1e-13);
        }
    }
}

#[test]
fn homogeneous_families_have_sine_velocity() {
    for (fam, rate) in [(flow::hh2_family(), 24.0), (flow::su3_family(), 4.0)] {
        for p in [0.1, 0.8, 2.5] {
            let r = flow::flow_rhs(&fam.scenario, &[], &[p]).unwrap();
            assert!((r.pdot[0] + rate * p.sin()).abs() < 1e-10, "{}", fam.scenario.name);
            assert!(r.residual < 1e-12);
        }
    }
}

#[test]
fn short_flow_dissipates_energy() {
    let s = builtin("su3");
    let trace = flow::integrate(&s, &[], &[1.2], 0.2, 0.002, 1e-6).unwrap();
    assert!(trace.aborted.is_none());
    assert!(trace.states.windows(2).all(|w| w[1].energy_density < w[0].energy_density));
    // closed form: tan(f/2) decays like exp(−4t)
    let last = trace.last();
    let expected = 2.0 * ((0.6f64).tan() * (-4.0 * last.t).exp()).atan();
    assert!((last.p[0] - expected).abs() < 1e-9);
}

#[test]
fn rescaling_by_three() {
    let r = flow::rescale_check(&builtin("su3"), &[1.1], 3.0).unwrap();
    assert!(r.torsion_residual < 1e-10 && r.div_residual < 1e-10);
    assert!((r.rate_ratio.unwrap() - 1.0 / 9.0).abs() < 1e-10);
}

#[test]
fn zero_field_is_not_a_soliton_on_the_rotated_euclidean_space() {
    let s = builtin("euclid_soliton");
    let r = flow::soliton_residual(&s, &SolitonData::zero(), &[vec![0.3], vec![-0.2]]).unwrap();
    assert!(r.r2 > 1e-3);
}
