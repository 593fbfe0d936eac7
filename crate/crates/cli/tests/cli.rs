use std::path::{Path, PathBuf};

use qmlab_cli::config::parse;
use qmlab_cli::output::RunManifest;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qmlab-cli-test-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn sample_configs_have_no_diagnostics() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        let cfg = parse(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|d| panic!("{}: {d:?}", p.display()));
        let d = cfg.check();
        assert!(d.is_empty(), "{}: {d:?}", p.display());
    }
}

#[test]
fn window_constraint_is_cited() {
    let err = parse("seed = 1\n[qms.q]\nterms = [{ a = 1.0, omega = [\"1/0\", \"0/1\", \"1/1\"], W = 2 }]\n").unwrap_err();
    assert!(err[0].message.contains("0 < W < |ω|"), "{err:?}");
    assert!(err[0].field.starts_with("line 3"), "{err:?}");
}

#[test]
fn zero_min_sep_is_an_error() {
    let cfg = parse("seed = 1\n[mc]\nmin_sep = 0.0\n").unwrap();
    let d = cfg.check();
    assert!(d.iter().any(|d| !d.warning && d.field == "mc.min_sep"), "{d:?}");
}

#[test]
fn missing_seed_and_unknown_ids_are_rejected() {
    assert!(parse("[mc]\nsamples = 10\n").is_err());
    let cfg = parse("seed = 1\n[gg]\nmaps = [\"nope\"]\nqms = [\"none\"]\n").unwrap();
    let fields: Vec<String> = cfg.check().into_iter().filter(|d| !d.warning).map(|d| d.field).collect();
    assert!(fields.contains(&"gg.maps".to_string()) && fields.contains(&"gg.qms".to_string()), "{fields:?}");
}

#[test]
fn n_other_than_three_warns_for_sl2_qms() {
    let cfg = parse("seed = 1\n[qms.q]\nturns = [5]\n[mc]\nn = 4\n").unwrap();
    assert!(cfg.check().iter().any(|d| d.warning && d.field == "mc.n"));
}

#[test]
fn adhoc_farey_queries() {
    let out = scratch("farey");
    let o = out.to_string_lossy().into_owned();
    assert_eq!(qmlab_cli::run(["qmlab", "--out", &o, "farey", "dist", "3/5", "1/0"]), 0);
    let csv = std::fs::read_to_string(out.join("farey.csv")).unwrap();
    assert_eq!(csv, "query,kind,input,value,upper\n0,distance,3/5 1/0,3,\n");
    assert_eq!(qmlab_cli::run(["qmlab", "--out", &o, "farey", "tau", "2,1,1,1"]), 0);
    assert_eq!(qmlab_cli::run(["qmlab", "--out", &o, "farey", "tau", "2,1,1,2"]), 2);
    assert_eq!(qmlab_cli::run(["qmlab", "--out", &o, "farey", "qm", "--turns", "5", "1,5,0,1"]), 0);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn exhausted_budget_exits_three_with_partial_manifest() {
    let out = scratch("budget");
    let o = out.to_string_lossy().into_owned();
    let cfg = configs().join("farey.toml");
    let code = qmlab_cli::run(["qmlab", "--config", &cfg.to_string_lossy(), "--out", &o, "--budget", "3", "farey"]);
    assert_eq!(code, 3);
    let m: RunManifest = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(m.partial.iter().any(|p| p.starts_with("aborted")), "{:?}", m.partial);
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn replay_reproduces_outputs() {
    let out = scratch("replay");
    let o = out.join("run").to_string_lossy().into_owned();
    let cfg = configs().join("trace.toml");
    assert_eq!(qmlab_cli::run(["qmlab", "--config", &cfg.to_string_lossy(), "--out", &o, "--seed", "9", "trace"]), 0);
    let m = out.join("run").join("manifest.json");
    let again = out.join("again").to_string_lossy().into_owned();
    assert_eq!(qmlab_cli::run(["qmlab", "--out", &again, "replay", "--manifest", &m.to_string_lossy()]), 0);
    assert_eq!(std::fs::read(out.join("run/trace.csv")).unwrap(), std::fs::read(out.join("again/trace.csv")).unwrap());
    let _ = std::fs::remove_dir_all(&out);
}

#[test]
fn commands_without_their_section_fail_cleanly() {
    let out = scratch("nosection");
    let o = out.join("x").to_string_lossy().into_owned();
    let cfg = configs().join("trace.toml");
    assert_eq!(qmlab_cli::run(["qmlab", "--config", &cfg.to_string_lossy(), "--out", &o, "gg"]), 2);
    assert!(!out.join("x").exists());
    let _ = std::fs::remove_dir_all(&out);
}
