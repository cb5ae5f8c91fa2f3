//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qal_cli::{parse_config, run, Report};
use qal_core::algebra::verify_generator_identities;
use qal_core::component_ops::gauge_abs_beta;
use qal_core::fixtures;
use qal_core::scalar::ratio;
use qal_core::spectral_lab::{sigma_max, sigma_min, truncate, truncate_window, TruncatedBidiagonal, DEFAULT_TOL};
use qal_core::{ComponentOp, ElSeq, Scalar, SeqModel};
use serde_json::Value;

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn run_text(text: &str) -> Result<Report, String> {
    let cfg = parse_config(text).map_err(|e| e.to_string())?;
    run(&cfg).map_err(|e| e.to_string())
}

fn run_file(name: &str) -> Result<Report, String> {
    let text = std::fs::read_to_string(configs_dir().join(name)).map_err(|e| e.to_string())?;
    run_text(&text)
}

fn check(r: &Report, prefix: &str) -> Result<(), String> {
    let hits: Vec<_> = r.checks.iter().filter(|c| c.name.starts_with(prefix)).collect();
    if hits.is_empty() {
        return Err(format!("no check named `{prefix}`"));
    }
    match hits.iter().find(|c| !c.passed) {
        Some(c) => Err(format!("{}: {}", c.name, c.detail)),
        None => Ok(()),
    }
}

fn results(r: &Report, key: &str) -> Value {
    r.results.get(key).cloned().unwrap_or(Value::Null)
}

fn c1_identities() -> Result<String, String> {
    for r in [ratio(1, 2), ratio(1, 3), ratio(9, 10)] {
        let res = verify_generator_identities(&r).map_err(|e| e.to_string())?;
        if let Some(bad) = res.iter().find(|x| !x.is_zero()) {
            return Err(format!("{} at r = {r}: {}", bad.name, bad.residual));
        }
    }
    Ok("all residuals exactly zero for r in {1/2, 1/3, 9/10}".into())
}

fn c2_oracle() -> Result<String, String> {
    let r = run_file("verify_algebra.qal")?;
    check(&r, "basis action of products")?;
    check(&r, "basis action of adjoints")?;
    Ok("200 seeded pairs agree with dense products on interior columns".into())
}

fn c3_leibniz() -> Result<String, String> {
    let r = run_file("classify_derivation.qal")?;
    for name in ["Leibniz rule", "rho-invariance", "rho-covariance"] {
        check(&r, name)?;
    }
    Ok("Leibniz and (co)variance exact on 200 seeded cases".into())
}

fn c4_contract() -> Result<String, String> {
    let r = run_file("implement.qal")?;
    check(&r, "implementation contract")?;
    let n = r.checks.iter().filter(|c| c.name.starts_with("implementation contract")).count();
    Ok(format!("[D, pi(a)]f = pi(d(a))f exactly in {n} model/kind combinations"))
}

fn c5_gns() -> Result<String, String> {
    for q in ["1/2", "1/4"] {
        let r = run_text(&format!("command = states\nw = geometric(q={q})\nsamples = 100\n"))?;
        check(&r, "GNS norm identity")?;
    }
    Ok("norm identity exact for q in {1/2, 1/4}".into())
}

fn c6_kernels() -> Result<String, String> {
    let r = run_file("nogo_option2.qal")?;
    check(&r, "formal kernel identities")?;
    check(&r, "kernel pairing diverges")?;
    let rows = results(&r, "kernels");
    let rows = rows.as_array().ok_or("missing kernel rows")?;
    let min = rows.iter().filter_map(|x| x["pairing_two_sided"].as_f64()).fold(f64::INFINITY, f64::min);
    if rows.len() != 11 || min <= 5.0 {
        return Err(format!("{} rows, smallest pairing sum {min}", rows.len()));
    }
    Ok(format!("exact kernels for n in [-5,5]; pairing sums at K = 200 are >= {min:.3}"))
}

fn c7_diagonal() -> Result<String, String> {
    let r = run_file("diag_criteria.qal")?;
    check(&r, "diagonal criterion")?;
    Ok(format!("{} fixture cases match", r.checks.len()))
}

fn c8_option1() -> Result<String, String> {
    let r = run_file("nogo_option1.qal")?;
    check(&r, "sigma_min ceiling")?;
    let rows = results(&r, "probe")["sigma_rows"].clone();
    let rows = rows.as_array().ok_or("missing sigma rows")?;
    let worst = rows.iter().filter_map(|x| x["sigma_min"].as_f64()).fold(0.0, f64::max);
    if rows.len() != 41 || worst > 2.0 + 1e-8 {
        return Err(format!("{} rows, largest sigma_min {worst}", rows.len()));
    }
    let op = fixtures::contrast_component();
    let centered = sigma_min(&truncate_window(&op, -100, 100), DEFAULT_TOL);
    let shifted = sigma_min(&truncate_window(&op, 20, 220), DEFAULT_TOL);
    if shifted < 10.0 * centered {
        return Err(format!("contrast sigma_min {centered} -> {shifted}"));
    }
    Ok(format!("max sigma_min {worst:.3e} over 41 components; contrast grows {centered:.3} -> {shifted:.3}"))
}

fn c9_option2() -> Result<String, String> {
    let r = run_file("nogo_option2.qal")?;
    check(&r, "degenerate eigenvectors")?;
    let rows = results(&r, "probe")["eigen_rows"].clone();
    let rows = rows.as_array().ok_or("missing eigen rows")?;
    let worst = rows.iter().filter_map(|x| x["residual"].as_f64()).fold(0.0, f64::max);
    let same_lambda = rows.iter().all(|x| x["lambda_re"].as_f64() == Some(1.0));
    if rows.len() != 11 || worst >= 1e-8 || !same_lambda {
        return Err(format!("{} rows, worst residual {worst}, shared lambda {same_lambda}", rows.len()));
    }
    Ok(format!("11 eigenvectors at lambda = beta(0) = 1, worst residual {worst:.2e}"))
}

fn perturbation(t: &TruncatedBidiagonal, scale: f64) -> TruncatedBidiagonal {
    let m = t.size();
    let wave = |j: usize, a: f64| Complex64::new((a * j as f64 + 0.3).sin(), (0.7 * a * j as f64).cos()) * scale;
    let diag = (0..m).map(|j| wave(j, 1.7)).collect();
    let sup = (0..m.saturating_sub(1)).map(|j| wave(j, 2.3)).collect();
    TruncatedBidiagonal::from_parts(t.n, t.lo, diag, sup)
}

fn c10_stability() -> Result<String, String> {
    let tol = DEFAULT_TOL;
    let signed = ComponentOp::new(0, ElSeq::abs_plus(Scalar::one()).neg(), ElSeq::abs_plus(Scalar::one()).scale(&Scalar::frac(1, 3)));
    let mut ops: Vec<(&str, ComponentOp)> = vec![("contrast", fixtures::contrast_component()), ("sign-changing beta", signed)];
    for (name, spec) in [("option1", fixtures::option1_nogo()), ("option2", fixtures::option2_nogo()), ("neither", fixtures::neither_nogo())] {
        let alpha = match &spec.weights {
            Some(w) => qal_core::component_ops::unweight_alpha(&spec.alpha, w).map_err(|e| e.to_string())?,
            None => spec.alpha.clone(),
        };
        ops.push((name, ComponentOp::new(0, spec.beta, alpha)));
    }
    let mut worst_gauge = 0.0f64;
    for (name, op) in &ops {
        for n in [-3i64, 0, 3] {
            let opn = op.with_n(n);
            let t = truncate(&opn, 60);
            for scale in [1e-3, 0.1, 1.0] {
                let e = perturbation(&t, scale);
                let norm_e = sigma_max(&e, tol);
                let gap = (sigma_min(&t.add(&e), tol) - sigma_min(&t, tol)).abs();
                if gap > norm_e + 2.0 * tol {
                    return Err(format!("Weyl bound fails for {name}, n = {n}: {gap} > {norm_e}"));
                }
            }
            if matches!(opn.alpha, SeqModel::Exact(_)) || *name != "contrast" {
                let (_, gauged) = gauge_abs_beta(&opn, -60 - n.abs(), 60 + n.abs()).map_err(|e| e.to_string())?;
                let g = (sigma_min(&truncate(&gauged, 60), tol) - sigma_min(&t, tol)).abs();
                worst_gauge = worst_gauge.max(g);
            }
        }
    }
    if worst_gauge > 1e-10 {
        return Err(format!("gauge changes sigma_min by {worst_gauge}"));
    }
    for fixture in ["option1", "option2", "neither", "contrast"] {
        let r = run_text(&format!("command = sweep\nfixture = {fixture}\nwidths = [25, 50, 100, 200]\n"))?;
        check(&r, "sigma_min non-increasing in N")?;
    }
    Ok(format!("Weyl bound on {} operators, gauge gap {worst_gauge:.1e}, sweeps monotone", ops.len()))
}

fn suite_outputs() -> Result<Vec<(String, String)>, String> {
    let mut names: Vec<_> = std::fs::read_dir(configs_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
        .filter(|n| n.ends_with(".qal"))
        .collect();
    names.sort();
    let mut out = Vec::new();
    for n in names {
        let r = run_file(&n)?;
        let mut text = r.to_json();
        for t in &r.tables {
            text.push_str(&t.to_csv());
        }
        out.push((n, text));
    }
    Ok(out)
}

fn c11_determinism() -> Result<String, String> {
    let first = suite_outputs()?;
    let second = suite_outputs()?;
    for ((name, a), (_, b)) in first.iter().zip(&second) {
        if a != b {
            return Err(format!("{name} differs between runs"));
        }
    }
    Ok(format!("{} reports byte-identical across two runs", first.len()))
}

type Criterion = (u32, &'static str, Duration, fn() -> Result<String, String>);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "exact identity suite", Duration::from_secs(1), c1_identities),
        (2, "algebra oracle", Duration::from_secs(5), c2_oracle),
        (3, "Leibniz and (co)variance", Duration::from_secs(5), c3_leibniz),
        (4, "implementation contract", Duration::from_secs(5), c4_contract),
        (5, "GNS norm identity", Duration::from_secs(2), c5_gns),
        (6, "kernel identity", Duration::from_secs(5), c6_kernels),
        (7, "diagonal criteria", Duration::from_secs(1), c7_diagonal),
        (8, "no-go option 1", Duration::from_secs(30), c8_option1),
        (9, "no-go option 2", Duration::from_secs(20), c9_option2),
        (10, "stability properties", Duration::from_secs(20), c10_stability),
        (11, "determinism", Duration::from_secs(600), c11_determinism),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (ok, msg) = match outcome {
            Ok(m) if took <= limit => (true, m),
            Ok(m) => (false, format!("{m}; took {took:.2?}, limit {limit:?}")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!("{} {id:>2} {name} ({took:.2?}): {msg}", if ok { "PASS" } else { "FAIL" });
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
