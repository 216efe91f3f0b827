use std::process::Command;

fn statelab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_statelab"))
        .args(args)
        .env_remove("STATELAB_OUT_DIR")
        .output()
        .expect("spawn statelab")
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = statelab(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn every_subcommand_is_byte_deterministic() {
    for argv in statelab::cli::reproducibility_argvs(3) {
        let args: Vec<&str> = argv[1..].iter().map(String::as_str).collect();
        let (a, b) = (statelab(&args), statelab(&args));
        assert_eq!(
            a.status.code(),
            Some(0),
            "{argv:?}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(a.stdout, b.stdout, "{argv:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn seeds_change_sampled_output() {
    let a = statelab(&["bell", "--samples", "4", "--format", "csv", "--seed", "1"]);
    let b = statelab(&["bell", "--samples", "4", "--format", "csv", "--seed", "2"]);
    assert_ne!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "a_x,a_y,a_z,b_x,b_y,b_z,P_concurrent,P_qm,diff"
    );
    assert_eq!(text.lines().count(), 5);
}

#[test]
fn documented_examples() {
    let v = json(&["bell", "--a", "0,0,1", "--b", "0,0,1"]);
    assert!((v["P_concurrent"].as_f64().unwrap() + 1.0).abs() < 1e-15);
    assert_eq!(v["diff"], 0.0);
    let v = json(&["zwm", "--T", "0"]);
    assert_eq!(v["visibility"], 0.0);
    assert_eq!(v["min_lag"].as_f64().unwrap(), 0.9 / 299_792_458.0);
    let v = json(&["ghz-check"]);
    assert_eq!(v["paradox"]["xxx_eigenvalue_minus_one_count"], 4);
}

#[test]
fn region_map_csv() {
    let out = statelab(&["ghz-set", "--format", "csv", "--grid-theta", "5", "--grid-phi", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("particle,theta,phi,assignment"));
    assert_eq!(lines.count(), 3 * 5 * 2);
}

#[test]
fn exit_codes() {
    assert_eq!(statelab(&["nope"]).status.code(), Some(2));
    assert_eq!(statelab(&["photo", "--A", "zero"]).status.code(), Some(2));
    let out = statelab(&["ghz-set", "--kind", "boundary-inclusive", "--samples", "512"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed: consistent-set verification"));
    let out = statelab(&["selftest", "--criterion", "4", "--criterion", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("PASS  4") && stderr.contains("PASS  7"));
}

#[test]
fn out_dir_from_environment() {
    let dir = std::env::temp_dir().join(format!("statelab-env-{}", std::process::id()));
    let out = Command::new(env!("CARGO_BIN_EXE_statelab"))
        .args(["photo", "--format", "csv"])
        .env("STATELAB_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(dir.join("photo.csv")).unwrap();
    assert!(text.starts_with("species,site,re,im,probability\n"));
    std::fs::remove_dir_all(dir).unwrap();
}
