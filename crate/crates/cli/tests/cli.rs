use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

use egw_core::channel::ChannelFile;
use egw_core::quantities::witness_report;
use egw_core::{Channel, JointPmf};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(format!("{name}.json"))
}

fn egw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_egw")).args(args).args(["--restarts", "4"]).output().expect("binary runs")
}

fn json_out(args: &[&str]) -> Value {
    let out = egw(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn error_of(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("json error on stderr");
    v["error"].clone()
}

#[test]
fn quantities_on_independent_bits() {
    let p = corpus("p_ind");
    let v = json_out(&["quantities", p.to_str().unwrap(), "--only", "g_nni,g_pni,g_ppi"]);
    let qs = v["result"]["quantities"].as_array().unwrap();
    assert_eq!(qs.len(), 3);
    for q in qs {
        assert!((q["value_bits"].as_f64().unwrap() - 1.0).abs() < 1e-9, "{q}");
    }
    assert_eq!(v["manifest"]["command"], "quantities");
    assert_eq!(v["result"]["chain"]["holds"], true);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{ not json").unwrap();
    let out = egw(&["graph", bad_json.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["exit_code"], 2);

    let out = egw(&["graph", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "Io");

    let light = dir.path().join("light.json");
    std::fs::write(&light, r#"{"x_alphabet":["a","b"],"y_alphabet":["c","d"],"pmf":[[0.2,0.2],[0.2,0.2]]}"#).unwrap();
    let out = egw(&["graph", light.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_of(&out)["kind"], "MassDeviationTooLarge");

    let out = egw(&["witness", corpus("p_l").to_str().unwrap(), "--kind", "cycle"]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(error_of(&out)["kind"], "ConditionNotMet");

    let out = egw(&["curve", corpus("p_eq").to_str().unwrap(), "--kind", "ib", "--t-grid", "0,2"]);
    assert!(out.status.success());

    let out = egw(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_of(&out)["kind"], "Parse");

    let out = egw(&["region", corpus("p_ind").to_str().unwrap(), "--support", "1,2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn witness_channels_round_trip() {
    for (name, kind) in [("p_ind", "bvn"), ("p_l", "path"), ("mixed_3x3", "frl"), ("two_block_4x4", "gk")] {
        let path = corpus(name);
        let v = json_out(&["witness", path.to_str().unwrap(), "--kind", kind]);
        let file: ChannelFile = serde_json::from_value(v["result"]["channel"].clone()).unwrap();
        let c = Channel::try_from(file).unwrap();
        let p = JointPmf::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let again = witness_report(&p, &c).unwrap();
        let reported = &v["result"]["report"];
        for (key, value) in [
            ("interaction", again.interaction),
            ("mi_x_u", again.mi_x_u),
            ("mi_y_u", again.mi_y_u),
            ("h_y_given_xu", again.h_y_given_xu),
        ] {
            assert!((reported[key].as_f64().unwrap() - value).abs() < 1e-10, "{name} {kind} {key}");
        }
    }
}

#[test]
fn csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("curve.csv");
    let out = egw(&["curve", corpus("p_eq").to_str().unwrap(), "--kind", "ib", "--t-grid", "0:0.5:1", "--csv", "-o", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# manifest: {"));
    assert_eq!(lines.next().unwrap(), "t,value,raw,cleanup_delta,status,max_residual");
    assert_eq!(lines.count(), 3);
}

#[test]
fn timings_stay_off_stdout() {
    let p = corpus("p_eq");
    let plain = egw(&["graph", p.to_str().unwrap()]);
    let timed = egw(&["graph", p.to_str().unwrap(), "--timings"]);
    assert_eq!(plain.stdout, timed.stdout);
    assert!(String::from_utf8_lossy(&timed.stderr).contains("timings"));
}

#[test]
fn rates_membership() {
    let p = corpus("p_ind");
    let v = json_out(&["rates", p.to_str().unwrap(), "--tuple", "2,0,0,0,0"]);
    assert_eq!(v["result"]["verdict"], "Inside", "{v}");
    let v = json_out(&["rates", p.to_str().unwrap(), "--tuple", "0,0,0,0,0"]);
    assert_eq!(v["result"]["verdict"], "Outside", "{v}");
}
