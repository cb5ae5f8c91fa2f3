use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qal")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn scratch(tag: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("qal-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn passing_run_writes_report() {
    let d = scratch("pass");
    let cfg = write_config(&d, "s.qal", "command = states\nsamples = 20\n");
    let out = d.join("out");
    let o = qal(&["states", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = std::fs::read_to_string(out.join("states.json")).unwrap();
    assert!(json.contains("\"passed\": true"));

    let cfg = write_config(&d, "w.qal", "command = sweep\nfixture = neither\nwidths = [10, 20]\n");
    let o = qal(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("sweep_sigma_min.csv")).unwrap();
    assert!(csv.starts_with("n,N,sigma_min\r\n"));
}

#[test]
fn failed_check_exits_one() {
    let d = scratch("fail");
    let cfg = write_config(&d, "n.qal", "command = nogo-probe\nfixture = option2\nexpect = compact_likely\n");
    let o = qal(&["nogo-probe", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn bad_config_exits_two_with_position() {
    let d = scratch("bad");
    let cfg = write_config(&d, "r.qal", "command = verify-algebra\nr = [3/2]\n");
    let o = qal(&["verify-algebra", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(":2:"));

    let cfg = write_config(&d, "k.qal", "command = states\nbogus = 1\n");
    let o = qal(&["states", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("2:1"));
}

#[test]
fn usage_errors_exit_two() {
    let d = scratch("usage");
    assert_eq!(qal(&["states", "--config", d.join("missing.qal").to_str().unwrap()]).status.code(), Some(2));
    let cfg = write_config(&d, "s.qal", "command = states\n");
    assert_eq!(qal(&["sweep", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(qal(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn vanishing_alpha_is_a_runtime_error() {
    let d = scratch("runtime");
    let text = "command = nogo-probe\nbeta = abs(shift=1)\nalpha = linear(slope_left=1, slope_right=1, anchor=0)\nn_range = 0..0\n";
    let cfg = write_config(&d, "z.qal", text);
    let o = qal(&["nogo-probe", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn stdout_json_is_deterministic() {
    let cfg = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/classify_derivation.qal");
    let a = qal(&["classify-derivation", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    let b = qal(&["classify-derivation", "--config", cfg.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(String::from_utf8_lossy(&a.stdout).contains("\"seed\": 7"));
}
