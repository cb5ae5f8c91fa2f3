//! Typed run configuration built from the parsed `key = value` entries.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use qal_core::component_ops::SeqModel;
use qal_core::scalar::rat_int;
use qal_core::states_gns::GeoTail;
use qal_core::{
    DerivationKind, EcSeq, ElSeq, Mode, PerturbationKind, QalError, Rational, RootOfUnity, Scalar, VerdictKind,
    WeightSpec,
};

use crate::syntax::{parse_entries, Arg, ConfigError, Diagnostic, Entry, Pos, Spanned, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    VerifyAlgebra,
    ClassifyDerivation,
    States,
    Implement,
    DiagCriteria,
    NogoProbe,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::VerifyAlgebra,
        Command::ClassifyDerivation,
        Command::States,
        Command::Implement,
        Command::DiagCriteria,
        Command::NogoProbe,
        Command::Sweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::VerifyAlgebra => "verify-algebra",
            Command::ClassifyDerivation => "classify-derivation",
            Command::States => "states",
            Command::Implement => "implement",
            Command::DiagCriteria => "diag-criteria",
            Command::NogoProbe => "nogo-probe",
            Command::Sweep => "sweep",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Command::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// GNS model selector; the weights of `weighted` come from the `w` key.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Tau0,
    TauPlus,
    TauMinus,
    Weighted,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Tau0, ModelKind::TauPlus, ModelKind::TauMinus, ModelKind::Weighted];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Tau0 => "tau0",
            ModelKind::TauPlus => "tau_plus",
            ModelKind::TauMinus => "tau_minus",
            ModelKind::Weighted => "weighted",
        }
    }
}

/// Built-in coefficient families for `nogo-probe`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Fixture {
    Option1,
    Option2,
    Neither,
    /// Diagonal operator `β = |k| + 1`, `α = 0` (sweeps only).
    Contrast,
}

impl Fixture {
    pub fn name(&self) -> &'static str {
        match self {
            Fixture::Option1 => "option1",
            Fixture::Option2 => "option2",
            Fixture::Neither => "neither",
            Fixture::Contrast => "contrast",
        }
    }
}

pub fn derivation_name(d: DerivationKind) -> &'static str {
    match d {
        DerivationKind::Invariant => "invariant",
        DerivationKind::Covariant => "covariant",
    }
}

pub fn verdict_name(v: VerdictKind) -> &'static str {
    match v {
        VerdictKind::CompactLikely => "compact_likely",
        VerdictKind::CompactRuledOut => "compact_ruled_out",
        VerdictKind::Inconclusive => "inconclusive",
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Exact => "exact",
        Mode::Double => "double",
    }
}

fn kind_name(k: PerturbationKind) -> &'static str {
    match k {
        PerturbationKind::Constant => "constant",
        PerturbationKind::Decaying => "decaying",
        PerturbationKind::LogDamped => "log_damped",
    }
}

/// Eventually-constant sequence expression.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EcExpr {
    Const(Scalar),
    Seq { left: Scalar, lo: i64, values: Vec<Scalar>, right: Scalar },
    Delta(i64),
    Step { at: i64, left: Scalar, right: Scalar },
}

impl EcExpr {
    pub fn build(&self) -> EcSeq {
        match self {
            EcExpr::Const(c) => EcSeq::constant(c.clone()),
            EcExpr::Seq { left, lo, values, right } => EcSeq::new(left.clone(), *lo, values.clone(), right.clone()),
            EcExpr::Delta(k) => EcSeq::delta(*k),
            EcExpr::Step { at, left, right } => EcSeq::step(*at, left.clone(), right.clone()),
        }
    }
}

fn fmt_list<T: fmt::Display>(items: &[T]) -> String {
    let parts: Vec<String> = items.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for EcExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EcExpr::Const(c) => write!(f, "const({c})"),
            EcExpr::Seq { left, lo, values, right } => {
                write!(f, "seq(left={left}, lo={lo}, values={}, right={right})", fmt_list(values))
            }
            EcExpr::Delta(k) => write!(f, "delta({k})"),
            EcExpr::Step { at, left, right } => write!(f, "step(at={at}, left={left}, right={right})"),
        }
    }
}

/// Coefficient expression for `beta` and `alpha`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqExpr {
    /// Eventually-constant values read as an eventually-linear sequence.
    Ec(EcExpr),
    Linear { slope_left: Scalar, slope_right: Scalar, anchor: Scalar },
    Abs { shift: Scalar },
    El { anchor: Scalar, inc: EcExpr },
    Values { lo: i64, values: Vec<Scalar>, slope_left: Scalar, slope_right: Scalar },
    /// The configured `beta` (allowed inside `alpha`).
    BetaRef,
    Scale { base: Box<SeqExpr>, factor: Scalar },
    Mul { base: Box<SeqExpr>, by: EcExpr },
    Perturbed { base: Box<SeqExpr>, kind: PerturbationKind, amplitude: Scalar },
    PolyRatio { base: Box<SeqExpr>, power: i32 },
    Modulus { base: Box<SeqExpr> },
    SqrtScaled { base: Box<SeqExpr>, ratio: EcExpr },
}

impl SeqExpr {
    /// Builds the sequence model; `beta` resolves [`SeqExpr::BetaRef`].
    pub fn build(&self, beta: Option<&SeqModel>) -> Result<SeqModel, String> {
        let exact = |e: &SeqExpr| -> Result<ElSeq, String> {
            match e.build(beta)? {
                SeqModel::Exact(s) => Ok(s),
                _ => Err(format!("`{e}` is not an exact eventually-linear sequence")),
            }
        };
        Ok(match self {
            SeqExpr::Ec(e) => SeqModel::Exact(ElSeq::from_ec(&e.build())),
            SeqExpr::Linear { slope_left, slope_right, anchor } => {
                SeqModel::Exact(ElSeq::kinked(anchor.clone(), slope_left.clone(), slope_right.clone()))
            }
            SeqExpr::Abs { shift } => SeqModel::Exact(ElSeq::abs_plus(shift.clone())),
            SeqExpr::El { anchor, inc } => SeqModel::Exact(ElSeq::new(anchor.clone(), inc.build())),
            SeqExpr::Values { lo, values, slope_left, slope_right } => {
                SeqModel::Exact(ElSeq::from_values(*lo, values, slope_left.clone(), slope_right.clone()))
            }
            SeqExpr::BetaRef => beta.cloned().ok_or("`beta` is referenced but not defined")?,
            SeqExpr::Scale { base, factor } => SeqModel::Exact(exact(base)?.scale(factor)),
            SeqExpr::Mul { base, by } => SeqModel::Exact(exact(base)?.mul_ec(&by.build())),
            SeqExpr::Perturbed { base, kind, amplitude } => {
                SeqModel::Perturbed { base: exact(base)?, kind: *kind, amplitude: amplitude.clone() }
            }
            SeqExpr::PolyRatio { base, power } => SeqModel::PolyRatio { base: Box::new(base.build(beta)?), power: *power },
            SeqExpr::Modulus { base } => SeqModel::Modulus(Box::new(base.build(beta)?)),
            SeqExpr::SqrtScaled { base, ratio } => {
                SeqModel::SqrtScaled { base: Box::new(base.build(beta)?), ratio: ratio.build() }
            }
        })
    }

    /// Builds an exact eventually-linear sequence or explains why not.
    pub fn build_exact(&self, beta: Option<&SeqModel>) -> Result<ElSeq, String> {
        match self.build(beta)? {
            SeqModel::Exact(s) => Ok(s),
            _ => Err(format!("`{self}` must be exact here")),
        }
    }

    fn references_beta(&self) -> bool {
        match self {
            SeqExpr::BetaRef => true,
            SeqExpr::Scale { base, .. }
            | SeqExpr::Mul { base, .. }
            | SeqExpr::Perturbed { base, .. }
            | SeqExpr::PolyRatio { base, .. }
            | SeqExpr::Modulus { base }
            | SeqExpr::SqrtScaled { base, .. } => base.references_beta(),
            _ => false,
        }
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Ec(e) => write!(f, "{e}"),
            SeqExpr::Linear { slope_left, slope_right, anchor } => {
                write!(f, "linear(slope_left={slope_left}, slope_right={slope_right}, anchor={anchor})")
            }
            SeqExpr::Abs { shift } => write!(f, "abs(shift={shift})"),
            SeqExpr::El { anchor, inc } => write!(f, "el(anchor={anchor}, inc={inc})"),
            SeqExpr::Values { lo, values, slope_left, slope_right } => write!(
                f,
                "values(lo={lo}, values={}, slope_left={slope_left}, slope_right={slope_right})",
                fmt_list(values)
            ),
            SeqExpr::BetaRef => f.write_str("beta"),
            SeqExpr::Scale { base, factor } => write!(f, "scale(base={base}, factor={factor})"),
            SeqExpr::Mul { base, by } => write!(f, "mul(base={base}, by={by})"),
            SeqExpr::Perturbed { base, kind, amplitude } => {
                write!(f, "perturbed(base={base}, kind={}, amplitude={amplitude})", kind_name(*kind))
            }
            SeqExpr::PolyRatio { base, power } => write!(f, "poly_ratio(base={base}, power={power})"),
            SeqExpr::Modulus { base } => write!(f, "modulus(base={base})"),
            SeqExpr::SqrtScaled { base, ratio } => write!(f, "sqrt_scaled(base={base}, ratio={ratio})"),
        }
    }
}

/// Weight family expression for `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightExpr {
    Geometric { q: Rational },
    Finite { lo: i64, values: Vec<Rational> },
    Point(i64),
    Custom { lo: i64, values: Vec<Rational>, left: GeoTail, right: GeoTail },
}

impl WeightExpr {
    pub fn build(&self) -> qal_core::Result<WeightSpec> {
        match self {
            WeightExpr::Geometric { q } => WeightSpec::geometric(q.clone()),
            WeightExpr::Finite { lo, values } => WeightSpec::finite(*lo, values.clone()),
            WeightExpr::Point(k) => Ok(WeightSpec::point(*k)),
            WeightExpr::Custom { lo, values, left, right } => {
                WeightSpec::custom(*lo, values.clone(), left.clone(), right.clone())
            }
        }
    }
}

fn rat_str(r: &Rational) -> String {
    Scalar::real(r.clone()).to_string()
}

fn rat_list(rs: &[Rational]) -> String {
    let parts: Vec<String> = rs.iter().map(rat_str).collect();
    format!("[{}]", parts.join(", "))
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Geometric { q } => write!(f, "geometric(q={})", rat_str(q)),
            WeightExpr::Finite { lo, values } => write!(f, "finite(lo={lo}, values={})", rat_list(values)),
            WeightExpr::Point(k) => write!(f, "point({k})"),
            WeightExpr::Custom { lo, values, left, right } => write!(
                f,
                "custom(lo={lo}, values={}, left_coef={}, left_q={}, right_coef={}, right_q={})",
                rat_list(values),
                rat_str(&left.coef),
                rat_str(&left.ratio),
                rat_str(&right.coef),
                rat_str(&right.ratio)
            ),
        }
    }
}

/// Parsed configuration. Every key is optional; commands fill in defaults.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub out: Option<String>,
    pub r: Option<Vec<Rational>>,
    pub beta: Option<SeqExpr>,
    pub alpha: Option<SeqExpr>,
    pub w: Option<WeightExpr>,
    pub c: Option<Scalar>,
    pub model: Option<ModelKind>,
    pub derivation: Option<DerivationKind>,
    pub lambda0: Option<Rational>,
    pub lambda_plus: Option<Rational>,
    pub lambda_minus: Option<Rational>,
    pub samples: Option<usize>,
    pub window: Option<(i64, i64)>,
    pub n_range: Option<(i64, i64)>,
    pub truncation: Option<i64>,
    pub widths: Option<Vec<i64>>,
    pub mu_window: Option<i64>,
    pub exponents: Option<Vec<f64>>,
    pub eigen_l: Option<i64>,
    pub eigen_window: Option<(i64, i64)>,
    pub eigen_n_range: Option<(i64, i64)>,
    pub eigen_tol: Option<f64>,
    pub tol: Option<f64>,
    pub roots: Option<Vec<RootOfUnity>>,
    pub fixture: Option<Fixture>,
    pub expect: Option<VerdictKind>,
    pub kernel_window: Option<i64>,
    pub pairing_k: Option<i64>,
}

pub const KEYS: [&str; 31] = [
    "command",
    "seed",
    "mode",
    "out",
    "r",
    "beta",
    "alpha",
    "w",
    "c",
    "model",
    "derivation",
    "lambda0",
    "lambda_plus",
    "lambda_minus",
    "samples",
    "window",
    "n_range",
    "truncation",
    "widths",
    "mu_window",
    "exponents",
    "eigen_l",
    "eigen_window",
    "eigen_n_range",
    "eigen_tol",
    "tol",
    "roots",
    "fixture",
    "expect",
    "kernel_window",
    "pairing_k",
];

type Conv<T> = Result<T, Diagnostic>;

fn describe(v: &Value) -> String {
    match v {
        Value::Number { text, .. } => format!("number `{text}`"),
        Value::Ident(s) => format!("`{s}`"),
        Value::Str(s) => format!("string \"{s}\""),
        Value::List(_) => "a list".into(),
        Value::Range(a, b) => format!("range `{a}..{b}`"),
        Value::Call { name, .. } => format!("`{name}(..)`"),
    }
}

fn want<T>(v: &Spanned, what: &str) -> Conv<T> {
    Err(Diagnostic::new(v.pos, format!("expected {what}, found {}", describe(&v.value))))
}

fn scalar(v: &Spanned) -> Conv<Scalar> {
    match &v.value {
        Value::Number { value, .. } => Ok(value.clone()),
        Value::Ident(s) if s == "i" => Ok(Scalar::i()),
        Value::Call { name, args } if name == "complex" => {
            let a = Args::new(v.pos, name, args, &["re", "im"])?;
            Ok(Scalar::new(a.req("re", rational)?, a.req("im", rational)?))
        }
        _ => want(v, "a number"),
    }
}

fn rational(v: &Spanned) -> Conv<Rational> {
    let s = scalar(v)?;
    if s.is_real() {
        Ok(s.re)
    } else {
        want(v, "a real number")
    }
}

fn int(v: &Spanned) -> Conv<i64> {
    let r = rational(v)?;
    if r.is_integer() {
        r.to_integer().to_i64().ok_or_else(|| Diagnostic::new(v.pos, "integer out of range"))
    } else {
        want(v, "an integer")
    }
}

fn positive_int(v: &Spanned) -> Conv<i64> {
    let k = int(v)?;
    if k > 0 {
        Ok(k)
    } else {
        Err(Diagnostic::new(v.pos, format!("expected a positive integer, found {k}")))
    }
}

fn float(v: &Spanned) -> Conv<f64> {
    match &v.value {
        Value::Number { value, text } if value.is_real() => {
            text.parse::<f64>().or_else(|_| Ok(qal_core::scalar::rat_to_f64(&value.re)))
        }
        _ => want(v, "a real number"),
    }
}

fn positive_float(v: &Spanned) -> Conv<f64> {
    let x = float(v)?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Diagnostic::new(v.pos, format!("expected a positive number, found {x}")))
    }
}

fn list<T>(v: &Spanned, item: impl Fn(&Spanned) -> Conv<T>) -> Conv<Vec<T>> {
    match &v.value {
        Value::List(items) => items.iter().map(item).collect(),
        _ => want(v, "a list"),
    }
}

fn range(v: &Spanned) -> Conv<(i64, i64)> {
    match &v.value {
        Value::Range(a, b) if a <= b => Ok((*a, *b)),
        Value::Range(a, b) => Err(Diagnostic::new(v.pos, format!("empty range {a}..{b}"))),
        _ => want(v, "a range `a..b`"),
    }
}

fn word(v: &Spanned) -> Conv<&str> {
    match &v.value {
        Value::Ident(s) => Ok(s),
        _ => want(v, "a name"),
    }
}

fn choice<T: Copy>(v: &Spanned, options: &[(&str, T)]) -> Conv<T> {
    let w = word(v)?;
    options.iter().find(|(n, _)| *n == w).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
        Diagnostic::new(v.pos, format!("unknown value `{w}` (expected one of: {})", names.join(", ")))
    })
}

/// Named and positional arguments of one call, matched against its parameters.
struct Args<'a> {
    name: &'a str,
    pos: Pos,
    slots: Vec<(&'static str, Option<&'a Spanned>)>,
}

impl<'a> Args<'a> {
    fn new(pos: Pos, name: &'a str, args: &'a [Arg], params: &[&'static str]) -> Conv<Self> {
        let mut slots: Vec<(&'static str, Option<&'a Spanned>)> = params.iter().map(|p| (*p, None)).collect();
        for (i, a) in args.iter().enumerate() {
            let idx = match &a.name {
                Some(n) => slots.iter().position(|(p, _)| p == n).ok_or_else(|| {
                    Diagnostic::new(a.pos, format!("`{name}` has no parameter `{n}` (expected: {})", params.join(", ")))
                })?,
                None if args[..i].iter().all(|b| b.name.is_none()) && i < params.len() => i,
                None => return Err(Diagnostic::new(a.pos, format!("unexpected positional argument to `{name}`"))),
            };
            if slots[idx].1.is_some() {
                return Err(Diagnostic::new(a.pos, format!("`{}` given twice", slots[idx].0)));
            }
            slots[idx].1 = Some(&a.value);
        }
        Ok(Args { name, pos, slots })
    }

    fn get(&self, p: &str) -> Option<&'a Spanned> {
        self.slots.iter().find(|(n, _)| *n == p).and_then(|(_, v)| *v)
    }

    fn req<T>(&self, p: &str, f: impl Fn(&Spanned) -> Conv<T>) -> Conv<T> {
        match self.get(p) {
            Some(v) => f(v),
            None => Err(Diagnostic::new(self.pos, format!("`{}` needs `{p}`", self.name))),
        }
    }

    fn opt<T>(&self, p: &str, f: impl Fn(&Spanned) -> Conv<T>, default: T) -> Conv<T> {
        self.get(p).map_or(Ok(default), f)
    }
}

fn call(v: &Spanned) -> Option<(&str, &[Arg])> {
    match &v.value {
        Value::Call { name, args } => Some((name, args)),
        _ => None,
    }
}

fn ec_expr(v: &Spanned) -> Conv<EcExpr> {
    if matches!(v.value, Value::Number { .. } | Value::Ident(_)) || call(v).is_some_and(|(n, _)| n == "complex") {
        return Ok(EcExpr::Const(scalar(v)?));
    }
    let Some((name, args)) = call(v) else {
        return want(v, "a sequence");
    };
    let z = Scalar::zero;
    Ok(match name {
        "const" => EcExpr::Const(Args::new(v.pos, name, args, &["value"])?.req("value", scalar)?),
        "seq" => {
            let a = Args::new(v.pos, name, args, &["left", "lo", "values", "right"])?;
            EcExpr::Seq {
                left: a.opt("left", scalar, z())?,
                lo: a.opt("lo", int, 0)?,
                values: a.opt("values", |x| list(x, scalar), Vec::new())?,
                right: a.opt("right", scalar, z())?,
            }
        }
        "delta" => EcExpr::Delta(Args::new(v.pos, name, args, &["at"])?.req("at", int)?),
        "step" => {
            let a = Args::new(v.pos, name, args, &["at", "left", "right"])?;
            EcExpr::Step { at: a.opt("at", int, 0)?, left: a.req("left", scalar)?, right: a.req("right", scalar)? }
        }
        other => {
            return Err(Diagnostic::new(
                v.pos,
                format!("unknown sequence `{other}` (expected const, seq, delta or step)"),
            ))
        }
    })
}

fn seq_expr(v: &Spanned) -> Conv<SeqExpr> {
    if let Value::Ident(s) = &v.value {
        if s == "beta" {
            return Ok(SeqExpr::BetaRef);
        }
    }
    let Some((name, args)) = call(v).filter(|(n, _)| !matches!(*n, "const" | "seq" | "delta" | "step" | "complex"))
    else {
        return ec_expr(v).map(SeqExpr::Ec);
    };
    let z = Scalar::zero;
    let base = |a: &Args| a.req("base", seq_expr).map(Box::new);
    Ok(match name {
        "linear" => {
            let a = Args::new(v.pos, name, args, &["slope_left", "slope_right", "anchor"])?;
            SeqExpr::Linear {
                slope_left: a.opt("slope_left", scalar, Scalar::one())?,
                slope_right: a.opt("slope_right", scalar, Scalar::one())?,
                anchor: a.opt("anchor", scalar, z())?,
            }
        }
        "abs" => SeqExpr::Abs { shift: Args::new(v.pos, name, args, &["shift"])?.opt("shift", scalar, z())? },
        "el" => {
            let a = Args::new(v.pos, name, args, &["anchor", "inc"])?;
            SeqExpr::El { anchor: a.opt("anchor", scalar, z())?, inc: a.req("inc", ec_expr)? }
        }
        "values" => {
            let a = Args::new(v.pos, name, args, &["lo", "values", "slope_left", "slope_right"])?;
            SeqExpr::Values {
                lo: a.opt("lo", int, 0)?,
                values: a.req("values", |x| list(x, scalar))?,
                slope_left: a.opt("slope_left", scalar, z())?,
                slope_right: a.opt("slope_right", scalar, z())?,
            }
        }
        "scale" => {
            let a = Args::new(v.pos, name, args, &["base", "factor"])?;
            SeqExpr::Scale { base: base(&a)?, factor: a.req("factor", scalar)? }
        }
        "mul" => {
            let a = Args::new(v.pos, name, args, &["base", "by"])?;
            SeqExpr::Mul { base: base(&a)?, by: a.req("by", ec_expr)? }
        }
        "perturbed" => {
            let a = Args::new(v.pos, name, args, &["base", "kind", "amplitude"])?;
            let kinds = [
                ("constant", PerturbationKind::Constant),
                ("decaying", PerturbationKind::Decaying),
                ("log_damped", PerturbationKind::LogDamped),
            ];
            SeqExpr::Perturbed {
                base: base(&a)?,
                kind: a.req("kind", |x| choice(x, &kinds))?,
                amplitude: a.req("amplitude", scalar)?,
            }
        }
        "poly_ratio" => {
            let a = Args::new(v.pos, name, args, &["base", "power"])?;
            let power = a.req("power", int)?;
            let power = i32::try_from(power).map_err(|_| Diagnostic::new(v.pos, "power out of range"))?;
            SeqExpr::PolyRatio { base: base(&a)?, power }
        }
        "modulus" => SeqExpr::Modulus { base: base(&Args::new(v.pos, name, args, &["base"])?)? },
        "sqrt_scaled" => {
            let a = Args::new(v.pos, name, args, &["base", "ratio"])?;
            SeqExpr::SqrtScaled { base: base(&a)?, ratio: a.req("ratio", ec_expr)? }
        }
        other => return Err(Diagnostic::new(v.pos, format!("unknown sequence `{other}`"))),
    })
}

fn geo_tail(a: &Args, coef: &str, q: &str) -> Conv<GeoTail> {
    Ok(GeoTail { coef: a.opt(coef, rational, Rational::zero())?, ratio: a.opt(q, rational, Rational::zero())? })
}

fn weight_expr(v: &Spanned) -> Conv<WeightExpr> {
    let Some((name, args)) = call(v) else {
        return want(v, "a weight family");
    };
    let e = match name {
        "geometric" => WeightExpr::Geometric { q: Args::new(v.pos, name, args, &["q"])?.req("q", rational)? },
        "finite" => {
            let a = Args::new(v.pos, name, args, &["lo", "values"])?;
            WeightExpr::Finite { lo: a.opt("lo", int, 0)?, values: a.req("values", |x| list(x, rational))? }
        }
        "point" => WeightExpr::Point(Args::new(v.pos, name, args, &["at"])?.req("at", int)?),
        "custom" => {
            let a = Args::new(v.pos, name, args, &["lo", "values", "left_coef", "left_q", "right_coef", "right_q"])?;
            WeightExpr::Custom {
                lo: a.opt("lo", int, 0)?,
                values: a.opt("values", |x| list(x, rational), Vec::new())?,
                left: geo_tail(&a, "left_coef", "left_q")?,
                right: geo_tail(&a, "right_coef", "right_q")?,
            }
        }
        other => {
            return Err(Diagnostic::new(
                v.pos,
                format!("unknown weight family `{other}` (expected geometric, finite, point or custom)"),
            ))
        }
    };
    e.build().map_err(|err| match err {
        QalError::WeightNotNormalized { total } => {
            Diagnostic::new(v.pos, format!("weights are not normalizable: total mass {total}, expected 1"))
        }
        other => Diagnostic::new(v.pos, other.to_string()),
    })?;
    Ok(e)
}

fn root(v: &Spanned) -> Conv<RootOfUnity> {
    let r = rational(v)?;
    let (num, den) = (r.numer().to_i64(), r.denom().to_i64());
    match (num, den) {
        (Some(n), Some(d)) => RootOfUnity::new(n, d).map_err(|e| Diagnostic::new(v.pos, e.to_string())),
        _ => Err(Diagnostic::new(v.pos, "root of unity out of range")),
    }
}

fn unit_interval(v: &Spanned) -> Conv<Rational> {
    let r = rational(v)?;
    if r.is_positive() && r < Rational::one() {
        Ok(r)
    } else {
        Err(Diagnostic::new(v.pos, "r must lie in (0,1)"))
    }
}

impl RunConfig {
    fn set(&mut self, e: &Entry) -> Conv<()> {
        let v = &e.value;
        match e.key.as_str() {
            "command" => {
                let w = word(v)?;
                self.command = Some(Command::from_name(w).ok_or_else(|| {
                    let names: Vec<&str> = Command::ALL.iter().map(Command::name).collect();
                    Diagnostic::new(v.pos, format!("unknown command `{w}` (expected one of: {})", names.join(", ")))
                })?);
            }
            "seed" => {
                let r = rational(v)?;
                let s = if r.is_integer() { r.to_integer().to_u64() } else { None };
                self.seed = Some(s.ok_or_else(|| Diagnostic::new(v.pos, "seed must be an integer in 0..2^64"))?);
            }
            "mode" => self.mode = Some(choice(v, &[("exact", Mode::Exact), ("double", Mode::Double)])?),
            "out" => match &v.value {
                Value::Str(s) => self.out = Some(s.clone()),
                _ => return want(v, "a quoted path"),
            },
            "r" => {
                self.r = Some(match &v.value {
                    Value::List(_) => list(v, unit_interval)?,
                    _ => vec![unit_interval(v)?],
                })
            }
            "beta" => {
                let b = seq_expr(v)?;
                if b.references_beta() {
                    return Err(Diagnostic::new(v.pos, "`beta` cannot refer to itself"));
                }
                self.beta = Some(b);
            }
            "alpha" => self.alpha = Some(seq_expr(v)?),
            "w" => self.w = Some(weight_expr(v)?),
            "c" => self.c = Some(scalar(v)?),
            "model" => {
                let opts: Vec<(&str, ModelKind)> = ModelKind::ALL.iter().map(|m| (m.name(), *m)).collect();
                self.model = Some(choice(v, &opts)?);
            }
            "derivation" => {
                self.derivation = Some(choice(
                    v,
                    &[("invariant", DerivationKind::Invariant), ("covariant", DerivationKind::Covariant)],
                )?)
            }
            "lambda0" => self.lambda0 = Some(rational(v)?),
            "lambda_plus" => self.lambda_plus = Some(rational(v)?),
            "lambda_minus" => self.lambda_minus = Some(rational(v)?),
            "samples" => self.samples = Some(positive_int(v)? as usize),
            "window" => self.window = Some(range(v)?),
            "n_range" => self.n_range = Some(range(v)?),
            "truncation" => self.truncation = Some(positive_int(v)?),
            "widths" => self.widths = Some(list(v, positive_int)?),
            "mu_window" => self.mu_window = Some(positive_int(v)?),
            "exponents" => self.exponents = Some(list(v, positive_float)?),
            "eigen_l" => self.eigen_l = Some(int(v)?),
            "eigen_window" => self.eigen_window = Some(range(v)?),
            "eigen_n_range" => self.eigen_n_range = Some(range(v)?),
            "eigen_tol" => self.eigen_tol = Some(positive_float(v)?),
            "tol" => self.tol = Some(positive_float(v)?),
            "roots" => self.roots = Some(list(v, root)?),
            "fixture" => {
                self.fixture = Some(choice(
                    v,
                    &[
                        ("option1", Fixture::Option1),
                        ("option2", Fixture::Option2),
                        ("neither", Fixture::Neither),
                        ("contrast", Fixture::Contrast),
                    ],
                )?)
            }
            "expect" => {
                let opts = [VerdictKind::CompactLikely, VerdictKind::CompactRuledOut, VerdictKind::Inconclusive];
                let opts: Vec<(&str, VerdictKind)> = opts.iter().map(|k| (verdict_name(*k), *k)).collect();
                self.expect = Some(choice(v, &opts)?);
            }
            "kernel_window" => self.kernel_window = Some(positive_int(v)?),
            "pairing_k" => self.pairing_k = Some(positive_int(v)?),
            other => {
                return Err(Diagnostic::new(
                    e.key_pos,
                    format!("unknown key `{other}`"),
                ))
            }
        }
        Ok(())
    }

    /// Cross-key checks that need the whole configuration.
    fn validate(&self, positions: &[(String, Pos)]) -> Vec<Diagnostic> {
        let at = |key: &str| positions.iter().find(|(k, _)| k == key).map(|(_, p)| *p).unwrap_or(Pos { line: 1, col: 1 });
        let mut out = Vec::new();
        let beta = self.beta.as_ref().map(|b| b.build(None));
        if let Some(Err(msg)) = &beta {
            out.push(Diagnostic::new(at("beta"), msg.clone()));
        }
        if let Some(a) = &self.alpha {
            let b = beta.as_ref().and_then(|b| b.as_ref().ok());
            if let Err(msg) = a.build(b) {
                out.push(Diagnostic::new(at("alpha"), msg));
            }
        }
        out
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let entries = parse_entries(text)?;
    let mut cfg = RunConfig::default();
    let mut diagnostics = Vec::new();
    let mut seen = BTreeSet::new();
    let mut positions = Vec::new();
    for e in &entries {
        if !seen.insert(e.key.clone()) {
            diagnostics.push(Diagnostic::new(e.key_pos, format!("duplicate key `{}`", e.key)));
            continue;
        }
        positions.push((e.key.clone(), e.value.pos));
        if let Err(d) = cfg.set(e) {
            diagnostics.push(d);
        }
    }
    if diagnostics.is_empty() {
        diagnostics = cfg.validate(&positions);
    }
    if diagnostics.is_empty() {
        Ok(cfg)
    } else {
        diagnostics.sort_by_key(|d| d.pos);
        Err(ConfigError { diagnostics })
    }
}

fn fmt_range((a, b): (i64, i64)) -> String {
    format!("{a}..{b}")
}

impl fmt::Display for RunConfig {
    /// Canonical form: one line per set key, in the order of [`KEYS`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut line = |key: &str, value: Option<String>| -> fmt::Result {
            match value {
                Some(v) => writeln!(f, "{key} = {v}"),
                None => Ok(()),
            }
        };
        line("command", self.command.map(|c| c.name().to_string()))?;
        line("seed", self.seed.map(|s| s.to_string()))?;
        line("mode", self.mode.map(|m| mode_name(m).to_string()))?;
        line("out", self.out.as_ref().map(|s| format!("\"{s}\"")))?;
        line("r", self.r.as_ref().map(|r| rat_list(r)))?;
        line("beta", self.beta.as_ref().map(|b| b.to_string()))?;
        line("alpha", self.alpha.as_ref().map(|b| b.to_string()))?;
        line("w", self.w.as_ref().map(|w| w.to_string()))?;
        line("c", self.c.as_ref().map(|c| c.to_string()))?;
        line("model", self.model.map(|m| m.name().to_string()))?;
        line("derivation", self.derivation.map(|d| derivation_name(d).to_string()))?;
        line("lambda0", self.lambda0.as_ref().map(rat_str))?;
        line("lambda_plus", self.lambda_plus.as_ref().map(rat_str))?;
        line("lambda_minus", self.lambda_minus.as_ref().map(rat_str))?;
        line("samples", self.samples.map(|s| s.to_string()))?;
        line("window", self.window.map(fmt_range))?;
        line("n_range", self.n_range.map(fmt_range))?;
        line("truncation", self.truncation.map(|s| s.to_string()))?;
        line("widths", self.widths.as_ref().map(|w| fmt_list(w)))?;
        line("mu_window", self.mu_window.map(|s| s.to_string()))?;
        line("exponents", self.exponents.as_ref().map(|e| fmt_list(e)))?;
        line("eigen_l", self.eigen_l.map(|s| s.to_string()))?;
        line("eigen_window", self.eigen_window.map(fmt_range))?;
        line("eigen_n_range", self.eigen_n_range.map(fmt_range))?;
        line("eigen_tol", self.eigen_tol.map(|t| format!("{t:e}")))?;
        line("tol", self.tol.map(|t| format!("{t:e}")))?;
        line(
            "roots",
            self.roots.as_ref().map(|rs| {
                let parts: Vec<String> =
                    rs.iter().map(|z| rat_str(&(rat_int(z.num()) / rat_int(z.den())))).collect();
                format!("[{}]", parts.join(", "))
            }),
        )?;
        line("fixture", self.fixture.map(|x| x.name().to_string()))?;
        line("expect", self.expect.map(|x| verdict_name(x).to_string()))?;
        line("kernel_window", self.kernel_window.map(|s| s.to_string()))?;
        line("pairing_k", self.pairing_k.map(|s| s.to_string()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qal_core::scalar::ratio;

    #[test]
    fn linear_dsl_builds_abs() {
        let cfg = parse_config("beta = linear(slope_left=-1, slope_right=1, anchor=0)").unwrap();
        let b = cfg.beta.unwrap().build_exact(None).unwrap();
        assert_eq!(b, ElSeq::abs_plus(Scalar::zero()));
    }

    #[test]
    fn geometric_weight_constant() {
        let cfg = parse_config("w = geometric(q=1/2)").unwrap();
        let w = cfg.w.unwrap().build().unwrap();
        assert_eq!(w.weight(0), ratio(1, 3));
    }

    #[test]
    fn r_outside_unit_interval() {
        let e = parse_config("r = 3/2").unwrap_err();
        assert_eq!(e.diagnostics.len(), 1);
        assert!(e.diagnostics[0].message.contains("r must lie in (0,1)"));
        assert_eq!(e.diagnostics[0].pos, Pos { line: 1, col: 5 });
    }

    #[test]
    fn unknown_and_duplicate_keys() {
        let e = parse_config("seed = 1\nbogus = 2\nseed = 3\n").unwrap_err();
        let msgs: Vec<String> = e.diagnostics.iter().map(|d| d.to_string()).collect();
        assert_eq!(msgs, vec!["2:1: unknown key `bogus`", "3:1: duplicate key `seed`"]);
    }

    #[test]
    fn unnormalized_weights() {
        let e = parse_config("w = finite(lo=0, values=[1/2, 1/4])").unwrap_err();
        assert!(e.diagnostics[0].message.contains("not normalizable"), "{e}");
    }

    #[test]
    fn alpha_may_reference_beta() {
        let cfg = parse_config("beta = abs(shift=1)\nalpha = scale(base=beta, factor=1/2)\n").unwrap();
        let b = cfg.beta.as_ref().unwrap().build(None).unwrap();
        let a = cfg.alpha.as_ref().unwrap().build_exact(Some(&b)).unwrap();
        assert_eq!(a.eval(-4), Scalar::frac(5, 2));
        assert!(parse_config("alpha = beta").is_err());
    }

    #[test]
    fn bad_call_arguments() {
        let e = parse_config("beta = abs(shft=1)").unwrap_err();
        assert!(e.diagnostics[0].message.contains("no parameter `shft`"));
        assert_eq!(e.diagnostics[0].pos.col, 12);
    }
}
