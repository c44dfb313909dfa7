use std::process::Command;

use opfem::bench::{convergence_rate, run_custom_kernel, run_mixed_check, run_poisson, RunReport};
use opfem::parloop::set_default_threads;

fn fingerprint(r: &[RunReport]) -> Vec<(u64, Option<usize>)> {
    r.iter().map(|r| (r.l2_error.unwrap().to_bits(), r.iterations)).collect()
}

#[test]
fn poisson_reports_are_deterministic_across_runs_and_threads() {
    set_default_threads(1);
    let a = run_poisson(2, 2, &[4, 8], 0).unwrap();
    let b = run_poisson(2, 2, &[4, 8], 1).unwrap();
    set_default_threads(4);
    let c = run_poisson(2, 2, &[4, 8], 0).unwrap();
    set_default_threads(1);
    assert_eq!(fingerprint(&a), fingerprint(&b));
    assert_eq!(fingerprint(&a), fingerprint(&c));
}

#[test]
fn rates_follow_the_log_ratio() {
    let r = run_poisson(2, 1, &[4, 8], 0).unwrap();
    let (e0, e1) = (r[0].l2_error.unwrap(), r[1].l2_error.unwrap());
    assert_eq!(r[1].rate, Some(convergence_rate(4, e0, 8, e1)));
    assert!(r[0].rate.is_none());
    assert!((convergence_rate(10, 4.0, 20, 1.0) - 2.0).abs() < 1e-15);
}

#[test]
fn custom_kernel_is_seeded() {
    let a = run_custom_kernel(8, 7).unwrap();
    let b = run_custom_kernel(8, 7).unwrap();
    assert!(a.passed());
    assert_eq!(a.checks, b.checks);
    let c = run_custom_kernel(8, 8).unwrap();
    assert_ne!(a.checks, c.checks);
}

#[test]
fn reports_serialize_to_json() {
    let (r, _) = run_mixed_check(1).unwrap();
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["case"], "mixed");
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
    for key in ["assemble_lhs", "assemble_rhs", "solve", "total"] {
        assert!(v["times"][key].is_number());
    }
}

fn bench() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bench"))
}

#[test]
fn cli_exit_code_follows_the_bands() {
    let out = std::env::temp_dir().join(format!("opfem-bench-{}.json", std::process::id()));
    let status = bench()
        .args(["poisson", "--dim", "2", "--degree", "1", "--n", "8,16,32", "--threads", "2", "--runs", "1", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    std::fs::remove_file(&out).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    assert!(v[2]["rate"].as_f64().unwrap() > 1.9);

    assert!(bench().args(["mixed", "--n", "2"]).output().unwrap().status.success());
    // the coarse 3D pair misses its band
    let o = bench().args(["poisson", "--dim", "3", "--n", "4,8", "--runs", "0"]).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn cli_wave_writes_its_report() {
    let out = std::env::temp_dir().join(format!("opfem-wave-{}.json", std::process::id()));
    bench()
        .args(["wave", "--n", "4", "--dt", "0.01", "--T", "0.3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    std::fs::remove_file(&out).unwrap();
    assert_eq!(v[0]["case"], "wave");
    assert_eq!(v[0]["checks"][0]["name"], "stable");
    assert_eq!(v[0]["checks"][0]["pass"], true);
    assert_eq!(v[0]["extra"]["steps"], 31);
    assert!(!bench().args(["wave", "--dt", "0"]).output().unwrap().status.success());
}
