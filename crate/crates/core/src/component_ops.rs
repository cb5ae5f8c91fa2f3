//! Fourier components `(Dₙf)(k) = β(k+n)f(k) − α(k)f(k+1)` of a covariant
//! implementation, and the tools used to analyse them: gauge and weight
//! transforms, the `μ` sequence, formal kernels, resolvent columns and the
//! two no-go constructions.
//!
//! Quantities that grow or decay exponentially (`μ`, kernels, eigenvectors)
//! are kept as log-magnitude plus phase.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::coeffseq::{EcSeq, ElSeq};
use crate::error::{QalError, Result};
use crate::scalar::{rat_sqrt_exact, rat_to_f64, Scalar};
use crate::states_gns::WeightSpec;

/// Bounded perturbations with known decay.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum PerturbationKind {
    /// `c`.
    Constant,
    /// `c / (1 + |k|)`.
    Decaying,
    /// `c / ln(e + |k|)`.
    LogDamped,
}

impl PerturbationKind {
    pub fn profile(&self, k: i64) -> f64 {
        let a = k.unsigned_abs() as f64;
        match self {
            PerturbationKind::Constant => 1.0,
            PerturbationKind::Decaying => 1.0 / (1.0 + a),
            PerturbationKind::LogDamped => 1.0 / (std::f64::consts::E + a).ln(),
        }
    }
}

/// Coefficient sequence of a component operator.
#[derive(Clone, Debug, PartialEq)]
pub enum SeqModel {
    Exact(ElSeq),
    /// `base(k) + amplitude·profile(k)`.
    Perturbed { base: ElSeq, kind: PerturbationKind, amplitude: Scalar },
    /// `base(k)·√ratio(k)` with `ratio ≥ 0`.
    SqrtScaled { base: Box<SeqModel>, ratio: EcSeq },
    /// `|base(k)|`.
    Modulus(Box<SeqModel>),
    /// `base(k)·((1+|k+1|)/(1+|k|))^p`, the `α` giving `μ(k) = (1+|k|)^p`.
    PolyRatio { base: Box<SeqModel>, power: i32 },
}

fn poly_ratio(k: i64, power: i32) -> Scalar {
    let r = Scalar::real(crate::scalar::ratio(1 + (k + 1).abs(), 1 + k.abs()));
    if power >= 0 {
        r.pow(power as u32)
    } else {
        r.inv().expect("ratio is positive").pow(power.unsigned_abs())
    }
}

impl From<ElSeq> for SeqModel {
    fn from(s: ElSeq) -> Self {
        SeqModel::Exact(s)
    }
}

fn sqrt_scalar(v: &Scalar) -> Option<Scalar> {
    if !v.is_real() {
        return None;
    }
    rat_sqrt_exact(&v.re).map(Scalar::real)
}

impl SeqModel {
    pub fn eval(&self, k: i64) -> Complex64 {
        match self {
            SeqModel::Exact(s) => s.eval_c64(k),
            SeqModel::Perturbed { base, kind, amplitude } => base.eval_c64(k) + amplitude.to_c64() * kind.profile(k),
            SeqModel::SqrtScaled { base, ratio } => base.eval(k) * rat_to_f64(&ratio.get(k).re).sqrt(),
            SeqModel::Modulus(base) => Complex64::new(base.eval(k).norm(), 0.0),
            SeqModel::PolyRatio { base, power } => {
                let r = (1.0 + (k + 1).abs() as f64) / (1.0 + k.abs() as f64);
                base.eval(k) * r.powi(*power)
            }
        }
    }

    /// Exact value, when the model is rational at `k`.
    pub fn eval_exact(&self, k: i64) -> Option<Scalar> {
        match self {
            SeqModel::Exact(s) => Some(s.eval(k)),
            SeqModel::Perturbed { base, kind, amplitude } => {
                if amplitude.is_zero() {
                    Some(base.eval(k))
                } else if *kind == PerturbationKind::Constant {
                    Some(base.eval(k) + amplitude.clone())
                } else {
                    None
                }
            }
            SeqModel::SqrtScaled { base, ratio } => Some(base.eval_exact(k)? * sqrt_scalar(ratio.get(k))?),
            SeqModel::Modulus(base) => {
                let v = base.eval_exact(k)?;
                rat_sqrt_exact(&v.norm_sqr()).map(Scalar::real)
            }
            SeqModel::PolyRatio { base, power } => Some(base.eval_exact(k)? * poly_ratio(k, *power)),
        }
    }

    /// Whether every value is exactly representable (checked structurally).
    pub fn is_exact(&self) -> bool {
        match self {
            SeqModel::Exact(_) => true,
            SeqModel::Perturbed { kind, amplitude, .. } => amplitude.is_zero() || *kind == PerturbationKind::Constant,
            SeqModel::SqrtScaled { base, ratio } => {
                base.is_exact()
                    && std::iter::once(ratio.left())
                        .chain(ratio.window())
                        .chain(std::iter::once(ratio.right()))
                        .all(|v| sqrt_scalar(v).is_some())
            }
            // |β| is rational only at perfect squares; decided pointwise
            SeqModel::Modulus(_) => false,
            SeqModel::PolyRatio { base, .. } => base.is_exact(),
        }
    }

    /// `(lim_{k→−∞}, lim_{k→+∞}) |s(k)|/|k|`.
    pub fn growth_rates(&self) -> (f64, f64) {
        match self {
            SeqModel::Exact(s) | SeqModel::Perturbed { base: s, .. } => {
                let (l, r) = s.tail_slopes();
                (l.abs_f64(), r.abs_f64())
            }
            SeqModel::SqrtScaled { base, ratio } => {
                let (l, r) = base.growth_rates();
                (l * rat_to_f64(&ratio.left().re).sqrt(), r * rat_to_f64(&ratio.right().re).sqrt())
            }
            SeqModel::Modulus(base) | SeqModel::PolyRatio { base, .. } => base.growth_rates(),
        }
    }

    /// Index at which the model vanishes in `[lo, hi]`, if any.
    pub fn find_zero(&self, lo: i64, hi: i64) -> Option<i64> {
        (lo..=hi).find(|&k| match self.eval_exact(k) {
            Some(v) => v.is_zero(),
            None => self.eval(k).norm() == 0.0,
        })
    }
}

/// Window-verified constants `c₂(|k|+1) ≤ |β(k)| ≤ c₁(|k|+1)` and
/// `|β(k+1) − β(k)| ≤ c₃`, combined with the limiting rates.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct GrowthCertificate {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub rate_left: f64,
    pub rate_right: f64,
    pub window: i64,
}

impl GrowthCertificate {
    pub fn holds(&self) -> bool {
        self.c2 > 0.0 && self.rate_left > 0.0 && self.rate_right > 0.0
    }
}

pub fn growth_certificate(beta: &SeqModel, window: i64) -> GrowthCertificate {
    let (rate_left, rate_right) = beta.growth_rates();
    let (mut c1, mut c2, mut c3) = (rate_left.max(rate_right), rate_left.min(rate_right), 0.0f64);
    let mut prev = beta.eval(-window - 1);
    for k in -window..=window {
        let v = beta.eval(k);
        let ratio = v.norm() / (k.abs() as f64 + 1.0);
        c1 = c1.max(ratio);
        c2 = c2.min(ratio);
        c3 = c3.max((v - prev).norm());
        prev = v;
    }
    GrowthCertificate { c1, c2, c3, rate_left, rate_right, window }
}

/// `(Dₙf)(k) = β(k+n)f(k) − α(k)f(k+1)` on `ℓ²(ℤ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentOp {
    pub n: i64,
    pub beta: SeqModel,
    pub alpha: SeqModel,
}

impl ComponentOp {
    pub fn new(n: i64, beta: impl Into<SeqModel>, alpha: impl Into<SeqModel>) -> Self {
        ComponentOp { n, beta: beta.into(), alpha: alpha.into() }
    }

    pub fn with_n(&self, n: i64) -> Self {
        ComponentOp { n, ..self.clone() }
    }

    pub fn diag(&self, k: i64) -> Complex64 {
        self.beta.eval(k + self.n)
    }

    pub fn sup(&self, k: i64) -> Complex64 {
        -self.alpha.eval(k)
    }

    /// `Dₙf` on `[lo, hi]` with `f` extended by zero.
    pub fn apply(&self, lo: i64, f: &[Complex64]) -> Vec<Complex64> {
        let len = f.len();
        (0..len)
            .map(|i| {
                let k = lo + i as i64;
                let next = if i + 1 < len { f[i + 1] } else { Complex64::zero() };
                self.diag(k) * f[i] + self.sup(k) * next
            })
            .collect()
    }

    pub fn growth_certificate(&self, window: i64) -> GrowthCertificate {
        growth_certificate(&self.beta, window)
    }
}

/// Complex sequence on `[lo, hi]` stored as `ln|x|` and `arg x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogSeq {
    lo: i64,
    log_abs: Vec<f64>,
    phase: Vec<f64>,
}

impl LogSeq {
    pub fn from_fn(lo: i64, hi: i64, f: impl Fn(i64) -> (f64, f64)) -> Self {
        let (log_abs, phase) = (lo..=hi).map(f).unzip();
        LogSeq { lo, log_abs, phase }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.log_abs.len() as i64 - 1
    }

    pub fn contains(&self, k: i64) -> bool {
        k >= self.lo && k <= self.hi()
    }

    fn idx(&self, k: i64) -> usize {
        assert!(self.contains(k), "index {k} outside [{}, {}]", self.lo, self.hi());
        (k - self.lo) as usize
    }

    pub fn log_abs(&self, k: i64) -> f64 {
        self.log_abs[self.idx(k)]
    }

    pub fn phase(&self, k: i64) -> f64 {
        self.phase[self.idx(k)]
    }

    /// `x(k)·e^{−shift}`.
    pub fn scaled(&self, k: i64, shift: f64) -> Complex64 {
        Complex64::from_polar((self.log_abs(k) - shift).exp(), self.phase(k))
    }

    pub fn value(&self, k: i64) -> Complex64 {
        self.scaled(k, 0.0)
    }

    pub fn max_log_abs(&self) -> f64 {
        self.log_abs.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

fn ln_parts(z: Complex64) -> (f64, f64) {
    (z.norm().ln(), z.arg())
}

/// `μ(0) = 1`, `α(k) = β(k)μ(k+1)/μ(k)` on a window containing `0`.
#[derive(Clone, Debug, PartialEq)]
pub struct MuSeq {
    log: LogSeq,
    exact: Option<Vec<Scalar>>,
}

impl MuSeq {
    /// Prescribed `μ` (for fixtures): `f(k) = (ln|μ(k)|, arg μ(k))`.
    pub fn from_log_fn(lo: i64, hi: i64, f: impl Fn(i64) -> (f64, f64)) -> Self {
        MuSeq { log: LogSeq::from_fn(lo, hi, f), exact: None }
    }

    pub fn window(&self) -> (i64, i64) {
        (self.log.lo(), self.log.hi())
    }

    pub fn log(&self) -> &LogSeq {
        &self.log
    }

    pub fn log_abs(&self, k: i64) -> f64 {
        self.log.log_abs(k)
    }

    pub fn exact(&self, k: i64) -> Option<&Scalar> {
        let lo = self.log.lo();
        self.exact.as_ref().map(|v| &v[(k - lo) as usize])
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Largest relative defect of `μ(k+1)β(k) = μ(k)α(k)` on the window.
    pub fn recurrence_residual(&self, alpha: &SeqModel, beta: &SeqModel) -> f64 {
        let (lo, hi) = self.window();
        (lo..hi)
            .map(|k| {
                let shift = self.log.log_abs(k).max(self.log.log_abs(k + 1));
                let lhs = self.log.scaled(k + 1, shift) * beta.eval(k);
                let rhs = self.log.scaled(k, shift) * alpha.eval(k);
                (lhs - rhs).norm() / (lhs.norm() + rhs.norm()).max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }
}

/// Builds `μ` on `[lo, hi]` (`lo ≤ 0 ≤ hi`) by the forward and backward recurrences.
pub fn mu_from(alpha: &SeqModel, beta: &SeqModel, lo: i64, hi: i64) -> Result<MuSeq> {
    if lo > 0 || hi < 0 {
        return Err(QalError::InvalidParameter(format!("mu window [{lo}, {hi}] must contain 0")));
    }
    if let Some(k) = alpha.find_zero(lo, hi) {
        return Err(QalError::ZeroAlpha { k });
    }
    if let Some(k) = beta.find_zero(lo, hi) {
        return Err(QalError::ZeroBeta { k });
    }
    let len = (hi - lo + 1) as usize;
    let at = |k: i64| (k - lo) as usize;
    let mut log_abs = vec![0.0; len];
    let mut phase = vec![0.0; len];
    for k in 0..hi {
        let (la, pa) = ln_parts(alpha.eval(k));
        let (lb, pb) = ln_parts(beta.eval(k));
        log_abs[at(k + 1)] = log_abs[at(k)] + la - lb;
        phase[at(k + 1)] = phase[at(k)] + pa - pb;
    }
    for k in (lo..0).rev() {
        let (la, pa) = ln_parts(alpha.eval(k));
        let (lb, pb) = ln_parts(beta.eval(k));
        log_abs[at(k)] = log_abs[at(k + 1)] + lb - la;
        phase[at(k)] = phase[at(k + 1)] + pb - pa;
    }
    let exact = if alpha.is_exact() && beta.is_exact() {
        let mut v = vec![Scalar::zero(); len];
        v[at(0)] = Scalar::one();
        for k in 0..hi {
            let (a, b) = (alpha.eval_exact(k).unwrap(), beta.eval_exact(k).unwrap());
            v[at(k + 1)] = &v[at(k)] * &a.checked_div(&b).unwrap();
        }
        for k in (lo..0).rev() {
            let (a, b) = (alpha.eval_exact(k).unwrap(), beta.eval_exact(k).unwrap());
            v[at(k)] = &v[at(k + 1)] * &b.checked_div(&a).unwrap();
        }
        Some(v)
    } else {
        None
    };
    Ok(MuSeq { log: LogSeq { lo, log_abs, phase }, exact })
}

/// Phases `V(k)` with `V(0) = 1` and `V(k+1) = V(k)·conj(sgn β(k))`, so that
/// `V(𝕂)Uβ(𝕂)V(𝕂)* = U|β(𝕂)|`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugePhases {
    lo: i64,
    phases: Vec<Complex64>,
}

impl GaugePhases {
    pub fn get(&self, k: i64) -> Complex64 {
        self.phases[(k - self.lo) as usize]
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.lo + self.phases.len() as i64 - 1)
    }
}

/// Conjugates `Dₙ` into the operator with diagonal `|β(k+n)|`:
/// `Dₙ' = V(𝕂+n+1) Dₙ V(𝕂+n)*`; `α` is unchanged. Phases cover
/// `[lo + n, hi + n + 1]` and `0`.
pub fn gauge_abs_beta(op: &ComponentOp, lo: i64, hi: i64) -> Result<(GaugePhases, ComponentOp)> {
    let a = (lo + op.n).min(0);
    let b = (hi + op.n + 1).max(0);
    if let Some(k) = op.beta.find_zero(a, b) {
        return Err(QalError::ZeroBeta { k });
    }
    let sgn = |k: i64| {
        let v = op.beta.eval(k);
        v / v.norm()
    };
    let mut phases = vec![Complex64::one(); (b - a + 1) as usize];
    let at = |k: i64| (k - a) as usize;
    for k in 0..b {
        phases[at(k + 1)] = phases[at(k)] * sgn(k).conj();
    }
    for k in (a..0).rev() {
        phases[at(k)] = phases[at(k + 1)] * sgn(k);
    }
    let gauged = ComponentOp { n: op.n, beta: SeqModel::Modulus(Box::new(op.beta.clone())), alpha: op.alpha.clone() };
    Ok((GaugePhases { lo: a, phases }, gauged))
}

/// `max_k |(Dₙ'g)(k) − V(k+n+1)(Dₙ V(·+n)* g)(k)|` over `[lo, hi]`.
pub fn gauge_residual(op: &ComponentOp, gauged: &ComponentOp, v: &GaugePhases, lo: i64, g: &[Complex64]) -> f64 {
    let n = op.n;
    let twisted: Vec<Complex64> = g.iter().enumerate().map(|(i, x)| v.get(lo + i as i64 + n).conj() * x).collect();
    let original = op.apply(lo, &twisted);
    let direct = gauged.apply(lo, g);
    original
        .iter()
        .zip(direct.iter())
        .enumerate()
        .map(|(i, (o, d))| (v.get(lo + i as i64 + n + 1) * o - d).norm())
        .fold(0.0, f64::max)
}

/// `α̃(k) = α(k)·√(w(k)/w(k+1))`.
pub fn unweight_alpha(alpha: &SeqModel, w: &WeightSpec) -> Result<SeqModel> {
    if let Some(k) = w.first_zero() {
        return Err(QalError::ZeroWeight { k });
    }
    let (lo, hi) = (w.lo(), w.hi());
    let vals: Vec<Scalar> = (lo - 1..=hi).map(|k| Scalar::real(w.weight(k) / w.weight(k + 1))).collect();
    let ratio = EcSeq::new(
        Scalar::real(w.left_tail().ratio.clone()),
        lo - 1,
        vals,
        Scalar::real(w.right_tail().ratio.recip()),
    );
    let scaled = SeqModel::SqrtScaled { base: Box::new(alpha.clone()), ratio: ratio.clone() };
    // fold into an exact sequence when every square root is rational
    if let (SeqModel::Exact(base), true) = (alpha, scaled.is_exact()) {
        return Ok(SeqModel::Exact(base.mul_ec(&ratio.map(|v| sqrt_scalar(v).unwrap()))));
    }
    Ok(scaled)
}

/// One-sided square-summability from the power-law exponent of the tail.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct TailVerdict {
    /// `None` when the exponent is too close to `−1/2` to decide.
    pub summable: Option<bool>,
    /// Fitted exponent `p` in `|x(k)| ≈ |k|^p` between `|k| = K/2` and `K`.
    pub exponent: f64,
}

const EXPONENT_MARGIN: f64 = 0.05;

fn tail_verdict(seq: &LogSeq, sign: i64) -> TailVerdict {
    let edge = if sign > 0 { seq.hi() } else { -seq.lo() };
    let half = (edge / 2).max(1);
    if edge < 4 {
        return TailVerdict { summable: None, exponent: f64::NAN };
    }
    let p = (seq.log_abs(sign * edge) - seq.log_abs(sign * half))
        / ((1.0 + edge as f64).ln() - (1.0 + half as f64).ln());
    let summable = if p < -0.5 - EXPONENT_MARGIN {
        Some(true)
    } else if p > -0.5 + EXPONENT_MARGIN {
        Some(false)
    } else {
        None
    };
    TailVerdict { summable, exponent: p }
}

/// Formal kernels `hₙ` of `Dₙ` and `h̃ₙ` of `Dₙ*` on the window of `μ`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelVectors {
    pub n: i64,
    pub h: LogSeq,
    pub h_tilde: LogSeq,
    pub h_exact: Option<Vec<Scalar>>,
    pub h_tilde_exact: Option<Vec<Scalar>>,
    /// Largest relative residual of `Dₙhₙ = 0` and `Dₙ*h̃ₙ = 0`.
    pub residual_h: f64,
    pub residual_h_tilde: f64,
    /// Exact residuals vanish (rational data only).
    pub exact_zero: Option<bool>,
    pub h_plus: TailVerdict,
    pub h_minus: TailVerdict,
    pub h_tilde_plus: TailVerdict,
    pub h_tilde_minus: TailVerdict,
}

/// Index range of the `β` factors in `μ(k)hₙ(k)` (numerator, `n > 0`) or
/// denominator (`n < 0`).
fn h_factor_range(n: i64) -> std::ops::Range<i64> {
    if n > 0 {
        0..n
    } else {
        n..0
    }
}

/// Factors of `Q(k) = conj(h̃ₙ(k))/μ(k)`: `1/β` over `0..=n` for `n ≥ 0`, `β` over `n+1..−1` otherwise.
fn q_factor_range(n: i64) -> std::ops::Range<i64> {
    if n >= 0 {
        0..n + 1
    } else {
        n + 1..0
    }
}

fn relative(lhs: Complex64, rhs: Complex64) -> f64 {
    (lhs - rhs).norm() / (lhs.norm() + rhs.norm()).max(f64::MIN_POSITIVE)
}

pub fn formal_kernels(op: &ComponentOp, mu: &MuSeq) -> KernelVectors {
    let n = op.n;
    let (lo, hi) = mu.window();
    let beta = &op.beta;
    let sign = if n > 0 { 1.0 } else { -1.0 };
    let h = LogSeq::from_fn(lo, hi, |k| {
        let (mut la, mut ph) = (-mu.log.log_abs(k), -mu.log.phase(k));
        for j in h_factor_range(n) {
            let (l, p) = ln_parts(beta.eval(j + k));
            la += sign * l;
            ph += sign * p;
        }
        (la, ph)
    });
    let qsign = if n >= 0 { -1.0 } else { 1.0 };
    let h_tilde = LogSeq::from_fn(lo, hi, |k| {
        let (mut la, mut ph) = (mu.log.log_abs(k), mu.log.phase(k));
        for j in q_factor_range(n) {
            let (l, p) = ln_parts(beta.eval(j + k));
            la += qsign * l;
            ph += qsign * p;
        }
        (la, -ph)
    });

    let residual_h = (lo..hi)
        .map(|k| {
            let s = h.log_abs(k).max(h.log_abs(k + 1));
            relative(op.diag(k) * h.scaled(k, s), op.alpha.eval(k) * h.scaled(k + 1, s))
        })
        .fold(0.0, f64::max);
    let residual_h_tilde = (lo + 1..=hi)
        .map(|k| {
            let s = h_tilde.log_abs(k).max(h_tilde.log_abs(k - 1));
            relative(
                op.diag(k).conj() * h_tilde.scaled(k, s),
                op.alpha.eval(k - 1).conj() * h_tilde.scaled(k - 1, s),
            )
        })
        .fold(0.0, f64::max);

    let exact = (mu.is_exact() && beta.is_exact() && op.alpha.is_exact()).then(|| {
        let b = |k: i64| beta.eval_exact(k).unwrap();
        let hx: Vec<Scalar> = (lo..=hi)
            .map(|k| {
                let mut v = mu.exact(k).unwrap().inv().expect("mu is nonzero");
                for j in h_factor_range(n) {
                    v = if n > 0 { v * b(j + k) } else { v.checked_div(&b(j + k)).unwrap() };
                }
                v
            })
            .collect();
        let htx: Vec<Scalar> = (lo..=hi)
            .map(|k| {
                let mut v = mu.exact(k).unwrap().clone();
                for j in q_factor_range(n) {
                    v = if n >= 0 { v.checked_div(&b(j + k)).unwrap() } else { v * b(j + k) };
                }
                v.conj()
            })
            .collect();
        let at = |k: i64| (k - lo) as usize;
        let a = |k: i64| op.alpha.eval_exact(k).unwrap();
        let zero_h = (lo..hi).all(|k| (b(k + n) * hx[at(k)].clone() - a(k) * hx[at(k + 1)].clone()).is_zero());
        let zero_ht = (lo + 1..=hi)
            .all(|k| (b(k + n).conj() * htx[at(k)].clone() - a(k - 1).conj() * htx[at(k - 1)].clone()).is_zero());
        (hx, htx, zero_h && zero_ht)
    });
    let (h_exact, h_tilde_exact, exact_zero) = match exact {
        Some((a, b, z)) => (Some(a), Some(b), Some(z)),
        None => (None, None, None),
    };
    KernelVectors {
        n,
        h_plus: tail_verdict(&h, 1),
        h_minus: tail_verdict(&h, -1),
        h_tilde_plus: tail_verdict(&h_tilde, 1),
        h_tilde_minus: tail_verdict(&h_tilde, -1),
        h,
        h_tilde,
        h_exact,
        h_tilde_exact,
        residual_h,
        residual_h_tilde,
        exact_zero,
    }
}

/// Partial sums of `|hₙ(k)h̃ₙ(k)| = 1/|β(n+k)|`: over `0 ≤ k ≤ K` and over `|k| ≤ K`.
pub fn pairing_partial_sums(kernels: &KernelVectors, big_k: i64) -> (f64, f64) {
    let term = |k: i64| (kernels.h.log_abs(k) + kernels.h_tilde.log_abs(k)).exp();
    let one: f64 = (0..=big_k).map(term).sum();
    let two = one + (-big_k..0).map(term).sum::<f64>();
    (one, two)
}

/// `ηₙ` with `(Dₙηₙ)(k) = χ₀(k)`: `c⁻hₙ` on `k ≤ 0`, `c⁺hₙ` on `k ≥ 1`,
/// `c⁺ − c⁻ = −1/(β(n)hₙ(0))`, and the coefficient of a non-summable side zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolventColumn {
    pub n: i64,
    pub c_plus: Complex64,
    pub c_minus: Complex64,
    /// Both sides of `hₙ` are square summable, so `Dₙ` has an `ℓ²` kernel.
    pub kernel_in_l2: bool,
    /// `max_k |(Dₙη)(k) − χ₀(k)|` on the window.
    pub residual: f64,
    pub eta: Vec<Complex64>,
    pub lo: i64,
}

impl ResolventColumn {
    /// Half-line carrying `ηₙ`: `+1` for `k ≥ 1`, `−1` for `k ≤ 0`.
    pub fn support_side(&self) -> i64 {
        if self.c_minus == Complex64::zero() {
            1
        } else {
            -1
        }
    }
}

pub fn resolvent_column(op: &ComponentOp, mu: &MuSeq) -> Result<ResolventColumn> {
    let kv = formal_kernels(op, mu);
    let jump = -(op.beta.eval(op.n) * kv.h.value(0)).inv();
    let right = kv.h_plus.summable == Some(true);
    let left = kv.h_minus.summable == Some(true);
    let (c_plus, c_minus) = match (left, right) {
        (_, true) => (jump, Complex64::zero()),
        (true, false) => (Complex64::zero(), -jump),
        (false, false) => return Err(QalError::NeitherOption { n: op.n }),
    };
    let (lo, hi) = mu.window();
    let eta: Vec<Complex64> = (lo..=hi)
        .map(|k| if k >= 1 { c_plus * kv.h.value(k) } else { c_minus * kv.h.value(k) })
        .collect();
    let image = op.apply(lo, &eta);
    let residual = (lo..hi)
        .map(|k| {
            let target = if k == 0 { Complex64::one() } else { Complex64::zero() };
            (image[(k - lo) as usize] - target).norm()
        })
        .fold(0.0, f64::max);
    Ok(ResolventColumn { n: op.n, c_plus, c_minus, kernel_in_l2: left && right, residual, eta, lo })
}

/// Sub-diagonal entries `Δ(k, k−1) = μ(k−1)/(β(k−1)μ(k))` of `Dₙ⁻¹`, the same for every `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubdiagTable {
    pub rows: Vec<(i64, Complex64)>,
    pub exact: Option<Vec<Scalar>>,
    pub sup: f64,
    pub argsup: i64,
}

impl SubdiagTable {
    /// `‖Dₙ⁻¹‖ ≥ sup_k |Δ(k, k−1)|`.
    pub fn inverse_norm_lower_bound(&self) -> f64 {
        self.sup
    }

    /// Resulting ceiling on `σ_min(Dₙ)`.
    pub fn sigma_min_ceiling(&self) -> f64 {
        1.0 / self.sup
    }
}

pub fn subdiag_obstruction(op: &ComponentOp, mu: &MuSeq, k_lo: i64, k_hi: i64) -> Result<SubdiagTable> {
    let (lo, hi) = mu.window();
    if k_lo - 1 < lo || k_hi > hi || k_lo > k_hi {
        return Err(QalError::InvalidParameter(format!(
            "k range [{k_lo}, {k_hi}] needs mu on [{}, {k_hi}], have [{lo}, {hi}]",
            k_lo - 1
        )));
    }
    let rows: Vec<(i64, Complex64)> = (k_lo..=k_hi)
        .map(|k| {
            let (lb, pb) = ln_parts(op.beta.eval(k - 1));
            let la = mu.log_abs(k - 1) - lb - mu.log_abs(k);
            let ph = mu.log.phase(k - 1) - pb - mu.log.phase(k);
            (k, Complex64::from_polar(la.exp(), ph))
        })
        .collect();
    let exact = (mu.is_exact() && op.beta.is_exact()).then(|| {
        (k_lo..=k_hi)
            .map(|k| {
                let den = op.beta.eval_exact(k - 1).unwrap() * mu.exact(k).unwrap().clone();
                mu.exact(k - 1).unwrap().checked_div(&den).unwrap()
            })
            .collect()
    });
    let (argsup, sup) = rows
        .iter()
        .map(|(k, d)| (*k, d.norm()))
        .fold((k_lo, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(SubdiagTable { rows, exact, sup, argsup })
}

/// Solution of `(Dₙ − β(l))f = 0` supported on `k ≤ l − n`.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenCertificate {
    pub n: i64,
    pub l: i64,
    pub lambda: Complex64,
    pub lo: i64,
    /// Values on `[lo, hi]`, scaled so that `max|f| = 1`.
    pub values: Vec<Complex64>,
    /// `‖(Dₙ − λ)f‖ / (‖(β(·+n) − λ)f‖ + ‖αf(·+1)‖)` on `[lo, hi − 1]`.
    pub residual: f64,
    /// Geometric extrapolation of `Σ_{k<lo} |f(k)|²` (same scaling).
    pub tail_l2: f64,
}

pub fn degenerate_eigvec(op: &ComponentOp, mu: &MuSeq, l: i64, lo: i64, hi: i64) -> Result<EigenCertificate> {
    let n = op.n;
    let top = l - n;
    if top < lo {
        return Err(QalError::TrivialSupport(format!(
            "support k <= {top} misses window [{lo}, {hi}] for n = {n}"
        )));
    }
    let (mlo, mhi) = mu.window();
    let need_hi = top.min(hi);
    if lo < mlo || need_hi > mhi {
        return Err(QalError::InvalidParameter(format!(
            "mu on [{mlo}, {mhi}] does not cover [{lo}, {need_hi}]"
        )));
    }
    let beta = &op.beta;
    let lambda = beta.eval(l);
    // collisions among the denominators β(j+n) − λ, j + n ∈ [lo + n, l − 1]
    let exact_lambda = beta.eval_exact(l);
    for j in (lo + n..l).rev() {
        let hit = match (&exact_lambda, beta.eval_exact(j)) {
            (Some(x), Some(y)) => *x == y,
            _ => (beta.eval(j) - lambda).norm() <= 1e-12 * (1.0 + lambda.norm()),
        };
        if hit {
            return Err(QalError::EigenvalueCollision { j, l });
        }
    }
    if beta.growth_rates().0 == 0.0 {
        return Err(QalError::InvalidParameter(
            "beta does not grow as k -> -infinity; collisions below the window are not excluded".into(),
        ));
    }
    // ln F(k), F(top) = 1, F(k) = F(k+1)·β(k)/(β(k+n) − λ)
    let len = (hi - lo + 1) as usize;
    let mut log_f = vec![f64::NEG_INFINITY; len];
    let mut ph_f = vec![0.0; len];
    let (mut lf, mut pf) = (0.0, 0.0);
    for k in (lo..=top).rev() {
        if k < top {
            let (lb, pb) = ln_parts(beta.eval(k));
            let (ld, pd) = ln_parts(beta.eval(k + n) - lambda);
            lf += lb - ld;
            pf += pb - pd;
        }
        if k <= hi {
            let i = (k - lo) as usize;
            log_f[i] = lf - mu.log_abs(k);
            ph_f[i] = pf - mu.log.phase(k);
        }
    }
    let shift = log_f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let values: Vec<Complex64> = log_f
        .iter()
        .zip(ph_f.iter())
        .map(|(la, p)| if la.is_finite() { Complex64::from_polar((la - shift).exp(), *p) } else { Complex64::zero() })
        .collect();
    let (mut r2, mut d2, mut a2) = (0.0, 0.0, 0.0);
    for i in 0..len - 1 {
        let k = lo + i as i64;
        let d = (op.diag(k) - lambda) * values[i];
        let a = op.alpha.eval(k) * values[i + 1];
        r2 += (d - a).norm_sqr();
        d2 += d.norm_sqr();
        a2 += a.norm_sqr();
    }
    let residual = r2.sqrt() / (d2.sqrt() + a2.sqrt()).max(f64::MIN_POSITIVE);
    let tail_l2 = if len >= 2 && values[1].norm() > 0.0 {
        let rho = values[0].norm() / values[1].norm();
        if rho < 1.0 {
            values[0].norm_sqr() * rho * rho / (1.0 - rho * rho)
        } else {
            f64::INFINITY
        }
    } else {
        0.0
    };
    Ok(EigenCertificate { n, l, lambda, lo, values, residual, tail_l2 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum MuOption {
    /// Rapid growth as `k → +∞`, rapid decay as `k → −∞`.
    Option1,
    /// The mirror image.
    Option2,
    Neither,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct MuClassification {
    pub option: MuOption,
    /// `ln|μ(k)|/ln(1+|k|)` at the window edges.
    pub exponent_right: f64,
    pub exponent_left: f64,
    /// Same ratio at half the edge.
    pub exponent_right_half: f64,
    pub exponent_left_half: f64,
    pub thresholds: Vec<f64>,
}

pub const DEFAULT_EXPONENTS: [f64; 3] = [4.0, 8.0, 16.0];

/// Heuristic rapid growth/decay test on the window: the exponent at the
/// edge must beat every threshold and still be moving outward.
pub fn classify_mu(mu: &MuSeq, thresholds: &[f64]) -> MuClassification {
    let (lo, hi) = mu.window();
    let exponent = |k: i64| mu.log_abs(k) / (1.0 + k.abs() as f64).ln();
    let (er, erh) = (exponent(hi), exponent((hi / 2).max(1).min(hi)));
    let (el, elh) = (exponent(lo), exponent((lo / 2).min(-1).max(lo)));
    let nmax = thresholds.iter().cloned().fold(0.0, f64::max);
    let grows = |e: f64, eh: f64| e > nmax && e > eh;
    let decays = |e: f64, eh: f64| e < -nmax && e < eh;
    let option = if grows(er, erh) && decays(el, elh) {
        MuOption::Option1
    } else if decays(er, erh) && grows(el, elh) {
        MuOption::Option2
    } else {
        MuOption::Neither
    };
    MuClassification {
        option,
        exponent_right: er,
        exponent_left: el,
        exponent_right_half: erh,
        exponent_left_half: elh,
        thresholds: thresholds.to_vec(),
    }
}
