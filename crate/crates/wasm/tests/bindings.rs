use serde_json::Value;
use span_lattice_wasm::{counterexample_json, freudenthal_json, replicate_json, MAX_SIDE};

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn replicate_reproduces_claim() {
    let out = replicate_json(r#"{"underlying":[1,2,3,4],"claim":[0,5,1,2]}"#);
    assert_eq!(out["ok"], true, "{out}");
    let got = floats(&out["replicated"]);
    for (a, b) in got.iter().zip([0.0, 5.0, 1.0, 2.0]) {
        assert!((a - b).abs() < 1e-9, "{got:?}");
    }
    assert!(out["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn replicate_reports_blocking_states() {
    let out = replicate_json(r#"{"underlying":[1,1,2],"claim":[0,1,2]}"#);
    assert_eq!(out["ok"], false);
    assert_eq!(out["block"], serde_json::json!([0, 1]));
    assert!((out["residual"].as_f64().unwrap() - 0.5).abs() < 1e-9);
}

#[test]
fn malformed_input_is_an_error_not_a_panic() {
    for input in ["", "{}", r#"{"underlying":[1,2],"claim":[1]}"#, r#"{"underlying":[],"claim":[]}"#] {
        assert_eq!(replicate_json(input)["ok"], false, "{input}");
        assert_eq!(freudenthal_json(input)["ok"], false, "{input}");
    }
}

#[test]
fn counterexample_stage_obeys_row_law() {
    let out = counterexample_json(10, 10, 3);
    assert_eq!(out["ok"], true, "{out}");
    assert_eq!(out["j"], 3);
    assert!(floats(&out["row_limit_residuals"]).iter().all(|r| *r == 0.0));
    let obstruction = out["obstruction"].as_array().unwrap();
    assert_eq!(obstruction.len(), 10);
    // only rows up to j are near e in their first column
    for (i, c) in obstruction.iter().enumerate() {
        assert_eq!(c["holds"], i < 3, "{c}");
    }
    // rows past j are zero
    let y = out["y"].as_array().unwrap();
    assert!(floats(&y[5]).iter().all(|v| *v == 0.0));
    assert_eq!(floats(&y[1])[0], 1.0);
}

#[test]
fn counterexample_clamps_and_limits() {
    let out = counterexample_json(4, 4, 99);
    assert_eq!(out["j"], out["max_j"]);
    assert_eq!(counterexample_json(MAX_SIDE + 1, 4, 1)["ok"], false);
    assert_eq!(counterexample_json(0, 4, 1)["ok"], false);
}

#[test]
fn dyadic_errors_shrink() {
    let out = freudenthal_json(r#"{"underlying":[1,2,3],"claim":[0,0.3,0.9],"levels":6}"#);
    assert_eq!(out["ok"], true, "{out}");
    let errors = floats(&out["errors"]);
    assert_eq!(errors.len(), 6);
    assert!(errors.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    assert!(errors[5] <= 0.9 / 64.0 + 1e-12);
}
