//! Loading scenario files.

use std::io::Write;

use qkflow::scenarios::{self, load};
use qkflow::Error;

fn write(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn max_torsion_difference(a: &scenarios::Scenario, b: &scenarios::Scenario, point: &[f64]) -> f64 {
    let (ga, gb) = (a.geometry_jet(point, false).unwrap(), b.geometry_jet(point, false).unwrap());
    ga.torsion()
        .iter()
        .zip(gb.torsion())
        .map(|(x, y)| (x.map(|j| j.value) - y.map(|j| j.value)).max_abs())
        .fold(0.0, f64::max)
}

#[test]
fn builtins_round_trip_through_files() {
    for name in scenarios::BUILTIN_NAMES {
        let s = scenarios::builtin(name).unwrap().prepared().unwrap();
        let file = write(&s.to_json_string());
        let t = load(file.path()).unwrap();
        let mut point = vec![0.37; s.n_coords()];
        point.extend(s.default_params());
        assert!(max_torsion_difference(&s, &t, &point) < 1e-14, "{name}");
        assert_eq!(scenarios::resolve(file.path().to_str().unwrap()).unwrap().name, s.name);
    }
}

#[test]
fn symmetric_structure_constants_are_rejected() {
    let file = write(
        r#"{"name": "bad", "structure_constants": [
            {"i": 1, "j": 2, "k": 3, "coeff": "1"},
            {"i": 1, "j": 3, "k": 2, "coeff": "1"}]}"#,
    );
    match load(file.path()) {
        Err(Error::Validation { location, message }) => {
            assert!(location.contains("structure_constants"), "{location}");
            assert!(message.contains("antisymmetric"), "{message}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn empty_constants_give_the_flat_structure() {
    let file = write(r#"{"name": "flat"}"#);
    let s = load(file.path()).unwrap();
    let g = s.geometry::<f64>(&[]).unwrap();
    assert!(g.torsion().iter().all(|t| t.is_zero()));
    assert_eq!(g.curvature().scalar(), 0.0);
}

#[test]
fn nilpotent_group_with_parameter_and_helpers() {
    // de⁸ = −t e¹² − t e³⁴: a Heisenberg-type nilpotent group.
    let file = write(
        r#"{"name": "heis", "parameters": [{"name": "t", "default": 0.5}],
            "coefficient_functions": {"c": "t/2", "c2": "2*c"},
            "structure_constants": [
              {"i": 8, "j": 1, "k": 2, "coeff": "c2"},
              {"i": 8, "j": 3, "k": 4, "coeff": "c2"}]}"#,
    );
    let s = load(file.path()).unwrap();
    assert!(s.is_homogeneous());
    let g = s.geometry::<f64>(&[0.5]).unwrap();
    let e = g.energy_density();
    assert!(e > 0.0);
    for t in g.torsion() {
        assert!((g.project_m(t) - t.clone()).max_abs() < 1e-14);
    }
    // energy density is quadratic in t
    let g2 = s.geometry::<f64>(&[1.0]).unwrap();
    assert!((g2.energy_density() / e - 4.0).abs() < 1e-12);
}

#[test]
fn malformed_files_report_where() {
    let cases = [
        (r#"{"name": "x", "structure_constants": [{"i": 9, "j": 1, "k": 2, "coeff": "1"}]}"#, "outside"),
        (r#"{"name": "x", "structure_constants": [{"i": 1, "j": 2, "k": 3, "coeff": "u"}]}"#, "unknown variable"),
        (r#"{"name": "x", "coefficient_functions": {"a": "b", "b": "a"},
             "structure_constants": [{"i": 1, "j": 2, "k": 3, "coeff": "a"}]}"#, "circular"),
        (r#"{"name": "x", "frame_action": [{"k": 1, "coord": "y", "coeff": "1"}]}"#, "active coordinate"),
    ];
    for (text, needle) in cases {
        let err = load(write(text).path()).unwrap_err().to_string();
        assert!(err.contains(needle), "{err}");
    }
    assert!(load(write("{not json").path()).is_err());
    assert!(load("/nonexistent/scenario.json").is_err());
}
