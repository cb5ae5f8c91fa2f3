//! Command implementations. Each command fills a [`Report`] with named
//! assertions, result data and CSV tables.

use num_complex::Complex64;
use num_traits::Zero;
use serde_json::{json, Map, Value};

use qal_core::algebra::{
    p_nonneg_from_ur, projection_normalization, rho, u_decomposition_coefficients, verify_generator_identities,
};
use qal_core::component_ops::{formal_kernels, mu_from, pairing_partial_sums, unweight_alpha};
use qal_core::derivations::{approx_inner_report, recover_covariant, recover_invariant};
use qal_core::fixtures;
use qal_core::sample::{Sampler, DEFAULT_SEED};
use qal_core::scalar::ratio;
use qal_core::spectral_lab::{diagonal_criteria, nogo_probe, sigma_sweep, DEFAULT_TOL};
use qal_core::states_gns::{gns_norm_w_sq, state_eval, FiniteVector};
use qal_core::{
    AlgebraElement, ComponentOp, CovariantDerivation, DerivationKind, EcSeq, ElSeq, GnsModel, ImplementationSpec,
    InvariantDerivation, Mode, MuOption, NogoSpec, QalError, Rational, RootOfUnity, Scalar, SeqModel, Side,
    StateSpec, VerdictKind, WeightSpec,
};

use crate::config::{derivation_name, verdict_name, Command, Fixture, ModelKind, RunConfig, SeqExpr};
use crate::report::{fmt_float, num, to_value, Report, Table};
use crate::syntax::ConfigError;

/// Failure to produce a report.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Usage(String),
    Runtime(String),
}

impl RunError {
    /// Process exit code: 2 for configuration or usage problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Usage(_) => 2,
            RunError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<QalError> for RunError {
    fn from(e: QalError) -> Self {
        RunError::Runtime(e.to_string())
    }
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

type Res<T> = Result<T, RunError>;

/// Exit code of a finished report: 0 when every assertion passed, 1 otherwise.
pub fn report_exit_code(r: &Report) -> i32 {
    if r.passed() {
        0
    } else {
        1
    }
}

fn usage(msg: impl Into<String>) -> RunError {
    RunError::Usage(msg.into())
}

fn sv(s: &Scalar) -> Value {
    Value::from(s.to_string())
}

fn rv(r: &Rational) -> Value {
    sv(&Scalar::real(r.clone()))
}

/// Runs the configured command.
pub fn run(cfg: &RunConfig) -> Res<Report> {
    let cmd = cfg.command.ok_or_else(|| usage("no command given"))?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let mode = cfg.mode.unwrap_or_default();
    let mode_name = match mode {
        Mode::Exact => "exact",
        Mode::Double => "double",
    };
    let mut rep = Report::new(cmd.name(), cfg.to_string(), seed, mode_name);
    match cmd {
        Command::VerifyAlgebra => verify_algebra(cfg, seed, mode, &mut rep)?,
        Command::ClassifyDerivation => classify_derivation(cfg, seed, &mut rep)?,
        Command::States => states(cfg, seed, &mut rep)?,
        Command::Implement => implement(cfg, seed, &mut rep)?,
        Command::DiagCriteria => diag_criteria(cfg, &mut rep)?,
        Command::NogoProbe => nogo(cfg, &mut rep)?,
        Command::Sweep => sweep(cfg, &mut rep)?,
    }
    Ok(rep)
}

fn default_rs() -> Vec<Rational> {
    vec![ratio(1, 2), ratio(1, 3), ratio(9, 10)]
}

fn verify_algebra(cfg: &RunConfig, seed: u64, mode: Mode, rep: &mut Report) -> Res<()> {
    let mut per_r = Map::new();
    for r in cfg.r.clone().unwrap_or_else(default_rs) {
        let residuals = verify_generator_identities(&r)?;
        let detail: Vec<Value> = residuals
            .iter()
            .map(|x| json!({"identity": x.name, "zero": x.is_zero(), "residual": x.residual.to_string()}))
            .collect();
        let label = Scalar::real(r.clone()).to_string();
        rep.check(format!("generator identities r={label}"), residuals.iter().all(|x| x.is_zero()), Value::Array(detail));
        let (c1, c2) = u_decomposition_coefficients(&r);
        // P_{≥0} must be a self-adjoint idempotent
        let p = p_nonneg_from_ur(&r)?;
        let proj_ok = p.mul(&p) == p && p.star() == p;
        rep.check(format!("projection P_nonneg r={label}"), proj_ok, Value::Null);
        per_r.insert(
            label,
            json!({
                "u_coefficients": [rv(&c1), rv(&c2)],
                "projection_normalization": projection_normalization(&r).map(|x| rv(&x)).unwrap_or(Value::Null),
            }),
        );
    }
    rep.result("generators", Value::Object(per_r));

    let samples = cfg.samples.unwrap_or(200);
    let (lo, hi) = cfg.window.unwrap_or((-12, 12));
    let mut sampler = Sampler::new(seed);
    let (mut mul_bad, mut star_bad, mut columns) = (0usize, 0usize, 0usize);
    let mut max_resid = 0.0f64;
    for _ in 0..samples {
        let (a, b) = sampler.pair();
        let ma = a.basis_action(lo, hi)?;
        let mb = b.basis_action(lo, hi)?;
        let mab = a.mul(&b).basis_action(lo, hi)?;
        let prod = ma.matmul(&mb);
        let cols = prod.interior_columns(prod.edge_margin());
        columns += cols.clone().count();
        match mode {
            Mode::Exact => {
                if !prod.columns_equal(&mab, cols) {
                    mul_bad += 1;
                }
            }
            Mode::Double => {
                let (fa, fb, fab) = (ma.to_c64(), mb.to_c64(), mab.to_c64());
                let size = fa.len();
                for k in cols {
                    let c = (k - lo) as usize;
                    for j in 0..size {
                        let dense: Complex64 = (0..size).map(|i| fa[j][i] * fb[i][c]).sum();
                        max_resid = max_resid.max((dense - fab[j][c]).norm());
                    }
                }
            }
        }
        let star = a.star().basis_action(lo, hi)?;
        if !star.columns_equal(&ma.adjoint(), lo..=hi) {
            star_bad += 1;
        }
    }
    let mul_ok = match mode {
        Mode::Exact => mul_bad == 0,
        Mode::Double => max_resid <= 1e-12,
    };
    rep.check(
        "basis action of products",
        mul_ok,
        json!({"samples": samples, "window": [lo, hi], "columns_compared": columns,
               "mismatched_pairs": mul_bad, "max_residual": num(max_resid)}),
    );
    rep.check("basis action of adjoints", star_bad == 0, json!({"samples": samples, "mismatched": star_bad}));
    Ok(())
}

fn exact_beta(e: Option<&SeqExpr>, default: SeqExpr) -> Res<ElSeq> {
    e.unwrap_or(&default).build_exact(None).map_err(usage)
}

fn default_roots() -> Vec<RootOfUnity> {
    [(1, 3), (1, 4), (1, 6), (3, 8)].iter().map(|&(n, d)| RootOfUnity::new(n, d).expect("valid order")).collect()
}

fn classify_derivation(cfg: &RunConfig, seed: u64, rep: &mut Report) -> Res<()> {
    let beta = exact_beta(cfg.beta.as_ref(), SeqExpr::Abs { shift: Scalar::zero() })?;
    let di = InvariantDerivation::new(beta.clone());
    let dc = CovariantDerivation::new(beta.clone());

    let rec_i = recover_invariant(&di.apply(&AlgebraElement::u()));
    rep.check(
        "recover invariant symbol from d(U)",
        rec_i.as_ref().is_ok_and(|d| *d == di),
        json!({"recovered": rec_i.as_ref().map(|d| d.beta().to_string()).unwrap_or_else(|e| e.to_string())}),
    );
    let p1 = AlgebraElement::diag(EcSeq::indicator_ge(1));
    let rec_c = recover_covariant(&dc.apply(&AlgebraElement::u().star()), &dc.apply(&p1));
    rep.check(
        "recover covariant symbol from d(U*) and d(P_1)",
        rec_c.as_ref().is_ok_and(|d| *d == dc),
        json!({"recovered": rec_c.as_ref().map(|d| d.beta().to_string()).unwrap_or_else(|e| e.to_string())}),
    );

    let samples = cfg.samples.unwrap_or(200);
    let roots = cfg.roots.clone().unwrap_or_else(default_roots);
    let mut sampler = Sampler::new(seed);
    let (mut leib_i, mut leib_c, mut cov_i, mut cov_c) = (0usize, 0usize, 0usize, 0usize);
    for t in 0..samples {
        let (a, b) = sampler.pair();
        let ab = a.mul(&b);
        if di.apply(&ab) != a.mul(&di.apply(&b)).add(&di.apply(&a).mul(&b)) {
            leib_i += 1;
        }
        if dc.apply(&ab) != a.mul(&dc.apply(&b)).add(&dc.apply(&a).mul(&b)) {
            leib_c += 1;
        }
        let z = roots[t % roots.len()];
        if di.apply_phased(&rho(&a, z))? != rho(&di.apply(&a), z) {
            cov_i += 1;
        }
        if dc.apply_phased(&rho(&a, z))? != rho(&dc.apply(&a), z).times_phase(-1)? {
            cov_c += 1;
        }
    }
    let roots_v: Vec<String> = roots.iter().map(|z| format!("{}/{}", z.num(), z.den())).collect();
    rep.check("Leibniz rule (invariant)", leib_i == 0, json!({"samples": samples, "failures": leib_i}));
    rep.check("Leibniz rule (covariant)", leib_c == 0, json!({"samples": samples, "failures": leib_c}));
    rep.check("rho-invariance", cov_i == 0, json!({"samples": samples, "roots": roots_v, "failures": cov_i}));
    rep.check("rho-covariance", cov_c == 0, json!({"samples": samples, "roots": roots_v, "failures": cov_c}));

    let inner = approx_inner_report(di.beta());
    let reach = di.beta().increments().domain_constant() + 1;
    let mut errors = Map::new();
    for n in [0i64, 1, 2, 4, 8, 16, 32, 64] {
        errors.insert(format!("{n:02}"), rv(&inner.error_sq_at(n)));
    }
    let vanishes = inner.error_sq_at(reach).is_zero();
    rep.check(
        "approximate innerness",
        vanishes == inner.is_c0,
        json!({"bounded_increments_vanish": inner.is_c0, "error_vanishes_beyond_window": vanishes}),
    );
    rep.result("beta", Value::from(beta.to_string()));
    rep.result("normalized_beta", Value::from(di.beta().to_string()));
    rep.result("covariant_alpha", Value::from(dc.alpha().to_string()));
    rep.result("approx_inner", json!({"is_c0": inner.is_c0, "error_sq_by_cutoff": errors}));
    Ok(())
}

fn weights(cfg: &RunConfig) -> Res<WeightSpec> {
    match &cfg.w {
        Some(w) => Ok(w.build()?),
        None => Ok(WeightSpec::geometric(ratio(1, 2))?),
    }
}

fn states(cfg: &RunConfig, seed: u64, rep: &mut Report) -> Res<()> {
    let w = weights(cfg)?;
    let one = Rational::from_integer(1.into());
    let zero = Rational::zero();
    let spec = StateSpec::new(
        cfg.lambda0.clone().unwrap_or(one),
        cfg.lambda_plus.clone().unwrap_or(zero.clone()),
        cfg.lambda_minus.clone().unwrap_or(zero),
        w.clone(),
    )?;
    let tau_w = StateSpec::tau_w(w.clone());
    let named = [
        ("configured", spec.clone()),
        ("tau_0", StateSpec::tau_k(0)),
        ("tau_plus", StateSpec::tau_inf(Side::Plus)),
        ("tau_minus", StateSpec::tau_inf(Side::Minus)),
    ];

    let samples = cfg.samples.unwrap_or(100);
    let mut sampler = Sampler::new(seed);
    let (mut norm_bad, mut pos_bad, mut cs_bad) = (0usize, 0usize, 0usize);
    for _ in 0..samples {
        let (a, b) = sampler.pair();
        let aa = a.star().mul(&a);
        if Scalar::real(gns_norm_w_sq(&a, &w)) != state_eval(&tau_w, &aa) {
            norm_bad += 1;
        }
        let bb = b.star().mul(&b);
        let ab = a.star().mul(&b);
        for (_, s) in &named {
            let (va, vb, vab) = (state_eval(s, &aa), state_eval(s, &bb), state_eval(s, &ab));
            if !va.is_real() || va.re < Rational::zero() {
                pos_bad += 1;
            }
            if vab.norm_sqr() > &va.re * &vb.re {
                cs_bad += 1;
            }
        }
    }
    rep.check("GNS norm identity", norm_bad == 0, json!({"samples": samples, "failures": norm_bad}));
    rep.check("positivity", pos_bad == 0, json!({"samples": samples, "states": named.len(), "failures": pos_bad}));
    rep.check("Cauchy-Schwarz", cs_bad == 0, json!({"samples": samples, "failures": cs_bad}));

    let ur = AlgebraElement::u_r(&ratio(1, 2))?;
    let elements = [
        ("identity", AlgebraElement::identity()),
        ("U", AlgebraElement::u()),
        ("P_0", AlgebraElement::projection(0)),
        ("P_nonneg", AlgebraElement::diag(EcSeq::indicator_ge(0))),
        ("U_r^* U_r (r=1/2)", ur.star().mul(&ur)),
    ];
    let mut evals = Map::new();
    for (sname, s) in &named {
        let mut row = Map::new();
        for (ename, a) in &elements {
            row.insert(ename.to_string(), sv(&state_eval(s, a)));
        }
        evals.insert(sname.to_string(), Value::Object(row));
    }
    let wv: Map<String, Value> = (-3..=3).map(|k| (format!("{k:+}"), rv(&w.weight(k)))).collect();
    rep.result("evaluations", Value::Object(evals));
    rep.result(
        "weights",
        json!({"spec": w.to_string(), "total_mass": rv(&w.total_mass()), "faithful": w.is_faithful(), "values": wv}),
    );
    Ok(())
}

fn gns_model(m: ModelKind, w: &WeightSpec) -> GnsModel {
    match m {
        ModelKind::Tau0 => GnsModel::Tau0,
        ModelKind::TauPlus => GnsModel::TauInf(Side::Plus),
        ModelKind::TauMinus => GnsModel::TauInf(Side::Minus),
        ModelKind::Weighted => GnsModel::Weighted(w.clone()),
    }
}

fn implementation_specs(cfg: &RunConfig, default_alpha: SeqExpr) -> Res<Vec<(String, ImplementationSpec)>> {
    let beta_model = cfg
        .beta
        .as_ref()
        .unwrap_or(&SeqExpr::Abs { shift: Scalar::one() })
        .build(None)
        .map_err(usage)?;
    let beta = match &beta_model {
        SeqModel::Exact(b) => b.clone(),
        _ => return Err(usage("beta must be exact for implementations")),
    };
    let alpha = cfg.alpha.as_ref().unwrap_or(&default_alpha).build_exact(Some(&beta_model)).map_err(usage)?;
    let w = weights(cfg)?;
    let models = cfg.model.map_or(ModelKind::ALL.to_vec(), |m| vec![m]);
    let kinds = cfg.derivation.map_or(vec![DerivationKind::Invariant, DerivationKind::Covariant], |d| vec![d]);
    let mut out = Vec::new();
    for &m in &models {
        for &d in &kinds {
            let spec = ImplementationSpec {
                derivation: d,
                model: gns_model(m, &w),
                beta: beta.clone(),
                alpha: alpha.clone(),
                c: cfg.c.clone().unwrap_or_else(Scalar::zero),
            };
            out.push((format!("{}/{}", m.name(), derivation_name(d)), spec));
        }
    }
    Ok(out)
}

fn implement(cfg: &RunConfig, seed: u64, rep: &mut Report) -> Res<()> {
    let default_alpha = SeqExpr::Linear {
        slope_left: Scalar::frac(1, 2),
        slope_right: Scalar::frac(1, 2),
        anchor: Scalar::zero(),
    };
    let samples = cfg.samples.unwrap_or(100);
    let mut details = Map::new();
    for (label, spec) in implementation_specs(cfg, default_alpha)? {
        let mut sampler = Sampler::new(seed);
        let mut bad = 0usize;
        for _ in 0..samples {
            let (a, f) = sampler.pair();
            let zero = match spec.model {
                GnsModel::Weighted(_) => spec.contract_defect(&a, &f)?.is_zero(),
                _ => {
                    let x = sampler.ec_seq();
                    let x = FiniteVector::from_entries((x.lo()..=x.hi()).map(|k| (k, x.get(k).clone())));
                    spec.contract_defect_vector(&a, &x)?.is_zero()
                }
            };
            if !zero {
                bad += 1;
            }
        }
        rep.check(format!("implementation contract {label}"), bad == 0, json!({"samples": samples, "failures": bad}));
        let info = match spec.model {
            GnsModel::Weighted(_) => json!({
                "eta": spec.eta().to_string(),
                "eta_norm_sq": spec.eta_norm_sq().map(|r| rv(&r)).unwrap_or(Value::Null),
            }),
            _ => {
                let m = qal_core::states_gns::implement_diag_models(&spec)?;
                let vals: Map<String, Value> = (-3..=3).map(|k| (format!("{k:+}"), sv(&m.value(k)))).collect();
                json!({"symbol": m.symbol.to_string(), "shifted": m.shifted, "values": vals})
            }
        };
        details.insert(label, info);
    }
    rep.result("implementations", Value::Object(details));
    Ok(())
}

fn verdict_value(v: &qal_core::ParametrixVerdict) -> Value {
    json!({"kind": verdict_name(v.kind), "criterion": v.criterion, "evidence": v.evidence})
}

fn diag_criteria(cfg: &RunConfig, rep: &mut Report) -> Res<()> {
    if cfg.beta.is_none() {
        let mut rows = Vec::new();
        for (name, spec, compact) in fixtures::diagonal_cases() {
            let v = diagonal_criteria(&spec)?;
            let want = if compact { VerdictKind::CompactLikely } else { VerdictKind::CompactRuledOut };
            rep.check(format!("diagonal criterion: {name}"), v.kind == want, verdict_value(&v));
            rows.push(json!({"case": name, "expected": verdict_name(want), "verdict": verdict_name(v.kind)}));
        }
        rep.result("fixture_matrix", Value::Array(rows));
        return Ok(());
    }
    let mut cfg1 = cfg.clone();
    cfg1.model = Some(cfg.model.unwrap_or(ModelKind::Tau0));
    cfg1.derivation = Some(cfg.derivation.unwrap_or(DerivationKind::Invariant));
    let zero = SeqExpr::Linear { slope_left: Scalar::zero(), slope_right: Scalar::zero(), anchor: Scalar::zero() };
    let (label, spec) = implementation_specs(&cfg1, zero)?.remove(0);
    let v = diagonal_criteria(&spec)?;
    let ok = !matches!(cfg.expect, Some(e) if e != v.kind);
    rep.check(format!("diagonal criterion: {label}"), ok, verdict_value(&v));
    rep.result("verdict", verdict_value(&v));
    Ok(())
}

fn fixture_spec(f: Fixture) -> Res<NogoSpec> {
    match f {
        Fixture::Option1 => Ok(fixtures::option1_nogo()),
        Fixture::Option2 => Ok(fixtures::option2_nogo()),
        Fixture::Neither => Ok(fixtures::neither_nogo()),
        Fixture::Contrast => Err(usage("the contrast fixture has alpha = 0 and is only available to sweep")),
    }
}

fn nogo_spec(cfg: &RunConfig) -> Res<NogoSpec> {
    let mut spec = match (cfg.fixture, &cfg.beta) {
        (Some(f), None) => {
            if cfg.alpha.is_some() || cfg.w.is_some() {
                return Err(usage("`fixture` fixes alpha and w; remove them or drop the fixture"));
            }
            fixture_spec(f)?
        }
        (None, Some(b)) => {
            let beta = b.build(None).map_err(usage)?;
            let alpha = cfg.alpha.as_ref().ok_or_else(|| usage("`alpha` is required with `beta`"))?;
            let alpha = alpha.build(Some(&beta)).map_err(usage)?;
            let w = cfg.w.as_ref().map(|w| w.build()).transpose()?;
            NogoSpec::new(beta, alpha, w)
        }
        (Some(_), Some(_)) => return Err(usage("give either `fixture` or `beta`, not both")),
        (None, None) => return Err(usage("this command needs `fixture` or `beta` and `alpha`")),
    };
    if let Some((a, b)) = cfg.n_range {
        (spec.n_min, spec.n_max) = (a, b);
    }
    if let Some(t) = cfg.truncation {
        spec.truncation = t;
    }
    if let Some(m) = cfg.mu_window {
        spec.mu_window = m;
    }
    if let Some(e) = &cfg.exponents {
        spec.exponents = e.clone();
    }
    if let Some(l) = cfg.eigen_l {
        spec.eigen_l = l;
    }
    if let Some((a, b)) = cfg.eigen_window {
        (spec.eigen_lo, spec.eigen_hi) = (a, b);
    }
    if let Some((a, b)) = cfg.eigen_n_range {
        (spec.eigen_n_min, spec.eigen_n_max) = (a, b);
    }
    if let Some(t) = cfg.eigen_tol {
        spec.eigen_tol = t;
    }
    if let Some(t) = cfg.tol {
        spec.tol = t;
    }
    Ok(spec)
}

fn option_name(o: MuOption) -> &'static str {
    match o {
        MuOption::Option1 => "option1",
        MuOption::Option2 => "option2",
        MuOption::Neither => "neither",
    }
}

/// Numerical slack for invariance checks between two floating computations.
const INVARIANCE_TOL: f64 = 1e-10;

fn nogo(cfg: &RunConfig, rep: &mut Report) -> Res<()> {
    let spec = nogo_spec(cfg)?;
    let out = nogo_probe(&spec)?;

    rep.check("growth certificate", out.growth.holds(), to_value(&out.growth));
    rep.check(
        "gauge invariance",
        out.gauge_residual <= INVARIANCE_TOL && out.gauge_sigma_gap <= INVARIANCE_TOL,
        json!({"residual": num(out.gauge_residual), "sigma_gap": num(out.gauge_sigma_gap)}),
    );
    rep.check(
        "bounded perturbation (Weyl)",
        out.perturbation_weyl_holds,
        json!({"sup": num(out.perturbation_sup)}),
    );
    rep.check(
        "mu recurrence",
        out.mu_recurrence_residual <= INVARIANCE_TOL,
        json!({"residual": num(out.mu_recurrence_residual)}),
    );
    if let Some(f) = cfg.fixture {
        let want = match f {
            Fixture::Option1 => MuOption::Option1,
            Fixture::Option2 => MuOption::Option2,
            _ => MuOption::Neither,
        };
        rep.check(
            "mu classification",
            out.classification.option == want,
            json!({"expected": option_name(want), "found": option_name(out.classification.option)}),
        );
    }
    match out.classification.option {
        MuOption::Option1 => {
            let bad: Vec<i64> = out.sigma_rows.iter().filter(|r| !r.holds).map(|r| r.n).collect();
            rep.check("sigma_min ceiling", bad.is_empty(), json!({"rows": out.sigma_rows.len(), "failing_n": bad}));
        }
        MuOption::Option2 => {
            let bad: Vec<i64> = out.eigen_rows.iter().filter(|r| !r.holds).map(|r| r.n).collect();
            rep.check(
                "degenerate eigenvectors",
                bad.is_empty(),
                json!({"rows": out.eigen_rows.len(), "failing_n": bad}),
            );
        }
        MuOption::Neither => {}
    }
    if let Some(e) = cfg.expect {
        rep.check(
            "verdict",
            out.verdict.kind == e,
            json!({"expected": verdict_name(e), "found": verdict_name(out.verdict.kind)}),
        );
    }

    let kernels = kernel_rows(cfg, &spec, out.growth.rate_left, out.growth.rate_right, rep)?;

    let mut sigma = Table::new("sigma", &["n", "sigma_min", "ceiling", "holds"]);
    for r in &out.sigma_rows {
        sigma.push(vec![r.n.to_string(), fmt_float(r.sigma_min), fmt_float(r.ceiling), r.holds.to_string()]);
    }
    let mut eigen = Table::new("eigen", &["n", "lambda_re", "lambda_im", "residual", "tail_l2", "holds"]);
    for r in &out.eigen_rows {
        eigen.push(vec![
            r.n.to_string(),
            fmt_float(r.lambda_re),
            fmt_float(r.lambda_im),
            fmt_float(r.residual),
            fmt_float(r.tail_l2),
            r.holds.to_string(),
        ]);
    }
    rep.tables.extend([sigma, eigen, kernels]);
    rep.result("probe", to_value(&out));
    rep.result("classification", Value::from(option_name(out.classification.option)));
    rep.result("verdict", verdict_value(&out.verdict));
    Ok(())
}

fn kernel_rows(cfg: &RunConfig, spec: &NogoSpec, rate_l: f64, rate_r: f64, rep: &mut Report) -> Res<Table> {
    let alpha = match &spec.weights {
        Some(w) => unweight_alpha(&spec.alpha, w)?,
        None => spec.alpha.clone(),
    };
    let kw = cfg.kernel_window.unwrap_or(64);
    let big_k = cfg.pairing_k.unwrap_or(200);
    let (n0, n1) = (spec.eigen_n_min, spec.eigen_n_max);
    let reach = big_k + n0.abs().max(n1.abs()) + 2;
    let mu = mu_from(&alpha, &spec.beta, -kw, kw)?;
    let mu_wide = mu_from(&alpha, &spec.beta, -reach, reach)?;
    // doubling K adds about (1/rate_left + 1/rate_right)·ln 2 to a divergent pairing
    let growth = (1.0 / rate_l + 1.0 / rate_r) * std::f64::consts::LN_2;
    let mut table = Table::new(
        "kernels",
        &["n", "exact_zero", "residual_h", "residual_h_tilde", "h_plus_l2", "h_minus_l2", "pairing_one_sided", "pairing_two_sided"],
    );
    let (mut bad_kernel, mut bad_pair) = (Vec::new(), Vec::new());
    let mut rows = Vec::new();
    for n in n0..=n1 {
        let op = ComponentOp::new(n, spec.beta.clone(), alpha.clone());
        let kv = formal_kernels(&op, &mu);
        let ok = match kv.exact_zero {
            Some(z) => z,
            None => kv.residual_h <= INVARIANCE_TOL && kv.residual_h_tilde <= INVARIANCE_TOL,
        };
        if !ok {
            bad_kernel.push(n);
        }
        let wide = formal_kernels(&op, &mu_wide);
        let (one, two) = pairing_partial_sums(&wide, big_k);
        let (_, two_half) = pairing_partial_sums(&wide, big_k / 2);
        if two - two_half < 0.9 * growth {
            bad_pair.push(n);
        }
        let l2 = |s: Option<bool>| s.map_or("unknown".to_string(), |b| b.to_string());
        table.push(vec![
            n.to_string(),
            kv.exact_zero.map_or("n/a".into(), |b| b.to_string()),
            fmt_float(kv.residual_h),
            fmt_float(kv.residual_h_tilde),
            l2(kv.h_plus.summable),
            l2(kv.h_minus.summable),
            fmt_float(one),
            fmt_float(two),
        ]);
        rows.push(json!({
            "n": n,
            "exact_zero": kv.exact_zero,
            "residual_h": num(kv.residual_h),
            "residual_h_tilde": num(kv.residual_h_tilde),
            "pairing_one_sided": num(one),
            "pairing_two_sided": num(two),
            "pairing_two_sided_half": num(two_half),
        }));
    }
    rep.check(
        "formal kernel identities",
        bad_kernel.is_empty(),
        json!({"window": [-kw, kw], "failing_n": bad_kernel}),
    );
    rep.check(
        "kernel pairing diverges",
        bad_pair.is_empty(),
        json!({"K": big_k, "expected_doubling_growth": num(growth), "failing_n": bad_pair}),
    );
    rep.result("kernels", Value::Array(rows));
    Ok(table)
}

fn sweep(cfg: &RunConfig, rep: &mut Report) -> Res<()> {
    let op = match cfg.fixture {
        Some(Fixture::Contrast) => fixtures::contrast_component(),
        _ => {
            let spec = nogo_spec(cfg)?;
            let alpha = match &spec.weights {
                Some(w) => unweight_alpha(&spec.alpha, w)?,
                None => spec.alpha.clone(),
            };
            ComponentOp::new(0, spec.beta, alpha)
        }
    };
    let (n0, n1) = cfg.n_range.unwrap_or((-2, 2));
    let ns: Vec<i64> = (n0..=n1).collect();
    let mut widths = cfg.widths.clone().unwrap_or_else(|| vec![50, 100, 200]);
    widths.sort_unstable();
    widths.dedup();
    let tol = cfg.tol.unwrap_or(DEFAULT_TOL);
    let rows = sigma_sweep(&op, &ns, &widths, tol);

    let mut table = Table::new("sigma_min", &["n", "N", "sigma_min"]);
    let mut bad = Vec::new();
    for pair in rows.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if a.n == b.n && b.sigma_min > a.sigma_min + 4.0 * tol * a.sigma_min.max(1.0) {
            bad.push(json!({"n": a.n, "N": [a.truncation, b.truncation]}));
        }
    }
    for r in &rows {
        table.push(vec![r.n.to_string(), r.truncation.to_string(), fmt_float(r.sigma_min)]);
    }
    rep.check("sigma_min non-increasing in N", bad.is_empty(), json!({"violations": bad}));
    rep.result("rows", to_value(&rows));
    rep.tables.push(table);
    Ok(())
}
