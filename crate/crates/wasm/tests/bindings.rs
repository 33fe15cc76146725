use serde_json::Value;
use umbilic_wasm::{analyze_json, balance_json, gamma_json, spec};

fn parse(text: Result<String, String>) -> Value {
    serde_json::from_str(&text.unwrap()).unwrap()
}

#[test]
fn analysis_carries_geometry_for_drawing() {
    let v = parse(analyze_json("lift", 2, 0.1));
    let nv = v["summary"]["vertices"].as_u64().unwrap() as usize;
    assert_eq!(v["positions"].as_array().unwrap().len(), 3 * nv);
    assert_eq!(v["a0_sq"].as_array().unwrap().len(), nv);
    assert_eq!(v["faces"].as_array().unwrap().len(), 320);
    assert_eq!(v["summary"]["report"]["ambient_dim"], 4);
    assert_eq!(v["summary"]["report"]["hypothesis_ok"], Value::Bool(true));
}

#[test]
fn gamma_profile_is_near_pi_on_the_sphere() {
    let v = parse(gamma_json("icosphere", 4, 0.0, 0, 6));
    let g = v["gamma"].as_array().unwrap();
    assert_eq!(g.len(), 6);
    for x in g {
        assert!((x.as_f64().unwrap() - std::f64::consts::PI).abs() < 2e-2);
    }
    assert!(gamma_json("icosphere", 1, 0.0, 10_000, 6).is_err());
}

#[test]
fn balancing_equalizes_half_areas() {
    let v = parse(balance_json("ellipsoid", 2, 1.4));
    let half = 2.0 * std::f64::consts::PI;
    for pair in v["after"].as_array().unwrap() {
        for a in pair.as_array().unwrap() {
            assert!((a.as_f64().unwrap() - half).abs() < 1e-6);
        }
    }
    assert_eq!(v["transforms"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_requests_are_errors() {
    assert!(spec("klein", 1, 0.0).is_err());
    assert!(spec("icosphere", 9, 0.0).is_err());
    assert!(analyze_json("harmonic", 2, 0.9).is_err());
    assert!(analyze_json("neck", 2, 0.7).is_err());
}
