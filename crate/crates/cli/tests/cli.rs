use std::path::Path;
use std::process::{Command, Output};

fn phlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phlab"))
        .args(args)
        .env("PHLAB_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_has_the_catalogue() {
    let o = phlab(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.lines().count() >= 8);
    for id in ["certify-T", "certify-Tstar", "counterexample-T", "dichotomy"] {
        assert!(text.contains(id), "{id}");
    }
}

#[test]
fn describe_prints_statement() {
    let o = phlab(&["describe", "counterexample-Tstar"]);
    assert!(o.status.success());
    let info = parabolic_hardy::verify::experiment_info("counterexample-Tstar").unwrap();
    let text = stdout(&o);
    assert!(text.contains(info.statement));
    for (name, _, _) in info.parameters {
        assert!(text.contains(name));
    }
    assert_eq!(phlab(&["describe", "no-such"]).status.code(), Some(2));
}

#[test]
fn invalid_configs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let missing = phlab(&["run", "mean-value", "--config", "/nonexistent/phlab.cfg", "--out", out]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read config"));

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "experiment = mean-value\ngrid_size = 3\n").unwrap();
    let unknown = phlab(&["run", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("grid_size"));

    assert_eq!(phlab(&["run", "no-such", "--out", out]).status.code(), Some(2));
    assert_eq!(phlab(&["run", "mean-value", "--n", "3", "--out", out]).status.code(), Some(2));
    // experiments that exist only in one dimension
    assert_eq!(phlab(&["run", "counterexample-T", "--n", "2", "--out", out]).status.code(), Some(2));
}

#[test]
fn counterexample_writes_growth_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = phlab(&["run", "counterexample-T", "--tmax", "256", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let exp = dir.path().join("counterexample-T");
    let csvs: Vec<_> = std::fs::read_dir(&exp)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "csv"))
        .collect();
    assert_eq!(csvs.len(), 1);
    let table = std::fs::read_to_string(&csvs[0]).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("T,I_T"));
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(last[0], 256.0);
    assert!(last[1] > 0.0);

    let result: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(exp.join("result.json")).unwrap()).unwrap();
    assert_eq!(result["id"], "counterexample-T");
    assert_eq!(result["pass"], true);
}

fn read(p: &Path) -> Vec<u8> {
    std::fs::read(p).unwrap()
}

#[test]
fn runs_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("run.cfg");
    std::fs::write(&cfg, "experiment = decompose-roundtrip\nseed = 5\natoms = 4\n").unwrap();
    for d in [&a, &b] {
        let o = phlab(&["run", "--config", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ea = a.path().join("decompose-roundtrip");
    let eb = b.path().join("decompose-roundtrip");
    assert_eq!(read(&ea.join("result.json")), read(&eb.join("result.json")));

    let ma: serde_json::Value = serde_json::from_slice(&read(&ea.join("manifest.json"))).unwrap();
    let mb: serde_json::Value = serde_json::from_slice(&read(&eb.join("manifest.json"))).unwrap();
    assert_eq!(ma["artifacts"], mb["artifacts"]);
    assert_eq!(ma["config"]["seed"], "5");
    assert_eq!(ma["config"]["atoms"], "4");

    use sha2::{Digest, Sha256};
    for art in ma["artifacts"].as_array().unwrap() {
        let file = art["file"].as_str().unwrap();
        assert_eq!(art["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(read(&ea.join(file)))));
    }
}
