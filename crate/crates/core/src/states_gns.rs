//! Invariant states, weighted GNS norms and implementations of derivations
//! in the GNS models.
//!
//! The weighted models act on the algebra itself (`f ∈ 𝒜` with the norm
//! `Σₙ Σₖ w(k)|fₙ(k)|²`). The `τ₀` model is `ℓ²(ℤ)` with the defining
//! action, and the `τ_±∞` models are `L²(S¹)` written in Fourier
//! coefficients, where `a(𝕂)` acts through its limit at `±∞`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::algebra::AlgebraElement;
use crate::coeffseq::{EcSeq, ElSeq};
use crate::derivations::{apply_covariant, apply_invariant, CovariantDerivation, InvariantDerivation};
use crate::error::{QalError, Result};
use crate::scalar::{rat_int, Rational, Scalar};

fn rpow(q: &Rational, e: i64) -> Rational {
    debug_assert!(e >= 0);
    num_traits::pow(q.clone(), e as usize)
}

/// `Σ_{j≥1} q^j`, `Σ j q^j`, `Σ j² q^j` for `0 ≤ q < 1`.
fn geometric_moments(q: &Rational) -> [Rational; 3] {
    let one = Rational::one();
    let m = &one - q;
    let s0 = q / &m;
    let s1 = q / (&m * &m);
    let s2 = q * (&one + q) / (&m * &m * &m);
    [s0, s1, s2]
}

/// Geometric tail `w(edge ± j) = coef·ratio^j` for `j ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeoTail {
    pub coef: Rational,
    pub ratio: Rational,
}

impl GeoTail {
    pub fn none() -> Self {
        GeoTail { coef: Rational::zero(), ratio: Rational::zero() }
    }

    fn mass(&self) -> Rational {
        &self.coef * &geometric_moments(&self.ratio)[0]
    }

    fn is_positive(&self) -> bool {
        self.coef.is_positive() && self.ratio.is_positive()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightFamily {
    /// `w(k) = C·q^{|k|}`, `C = (1−q)/(1+q)`.
    Geometric { q: Rational },
    Finite,
    CustomGeometricTails,
}

/// Probability weights on `ℤ`: a finite window plus geometric tails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightSpec {
    family: WeightFamily,
    lo: i64,
    window: Vec<Rational>,
    left: GeoTail,
    right: GeoTail,
}

impl WeightSpec {
    pub fn geometric(q: Rational) -> Result<Self> {
        if !q.is_positive() || q >= Rational::one() {
            return Err(QalError::InvalidParameter(format!("q must lie in (0,1), got {q}")));
        }
        let c = (Rational::one() - &q) / (Rational::one() + &q);
        let tail = GeoTail { coef: c.clone(), ratio: q.clone() };
        WeightSpec::build(WeightFamily::Geometric { q }, 0, vec![c], tail.clone(), tail)
    }

    pub fn finite(lo: i64, values: Vec<Rational>) -> Result<Self> {
        WeightSpec::build(WeightFamily::Finite, lo, values, GeoTail::none(), GeoTail::none())
    }

    /// Point mass at `k`.
    pub fn point(k: i64) -> Self {
        WeightSpec::finite(k, vec![Rational::one()]).expect("point mass is normalized")
    }

    pub fn custom(lo: i64, values: Vec<Rational>, left: GeoTail, right: GeoTail) -> Result<Self> {
        WeightSpec::build(WeightFamily::CustomGeometricTails, lo, values, left, right)
    }

    fn build(family: WeightFamily, lo: i64, window: Vec<Rational>, left: GeoTail, right: GeoTail) -> Result<Self> {
        if window.is_empty() {
            return Err(QalError::InvalidParameter("weight window must be nonempty".into()));
        }
        if let Some(v) = window.iter().find(|v| v.is_negative()) {
            return Err(QalError::InvalidParameter(format!("negative weight {v}")));
        }
        for t in [&left, &right] {
            if t.coef.is_negative() || t.ratio.is_negative() || t.ratio >= Rational::one() {
                return Err(QalError::InvalidParameter(format!(
                    "geometric tail needs coef >= 0 and ratio in [0,1), got coef={} ratio={}",
                    t.coef, t.ratio
                )));
            }
        }
        let w = WeightSpec { family, lo, window, left, right };
        let total = w.total_mass();
        if !total.is_one() {
            return Err(QalError::WeightNotNormalized { total: total.to_string() });
        }
        Ok(w)
    }

    pub fn family(&self) -> &WeightFamily {
        &self.family
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.window.len() as i64 - 1
    }

    pub fn window(&self) -> &[Rational] {
        &self.window
    }

    pub fn left_tail(&self) -> &GeoTail {
        &self.left
    }

    pub fn right_tail(&self) -> &GeoTail {
        &self.right
    }

    pub fn total_mass(&self) -> Rational {
        self.window.iter().cloned().sum::<Rational>() + self.left.mass() + self.right.mass()
    }

    pub fn weight(&self, k: i64) -> Rational {
        if k < self.lo {
            &self.left.coef * rpow(&self.left.ratio, self.lo - k)
        } else if k > self.hi() {
            &self.right.coef * rpow(&self.right.ratio, k - self.hi())
        } else {
            self.window[(k - self.lo) as usize].clone()
        }
    }

    /// All weights strictly positive (faithful state).
    pub fn is_faithful(&self) -> bool {
        self.window.iter().all(Signed::is_positive) && self.left.is_positive() && self.right.is_positive()
    }

    /// First index with `w(k) = 0`, scanning the window and then the tails.
    pub fn first_zero(&self) -> Option<i64> {
        if !self.left.is_positive() {
            return Some(self.lo - 1);
        }
        if let Some(i) = self.window.iter().position(|v| v.is_zero()) {
            return Some(self.lo + i as i64);
        }
        if !self.right.is_positive() {
            return Some(self.hi() + 1);
        }
        None
    }

    /// `Σ_{j≥1} w(h+j)·p(j)` for `h ≥ hi` and `p = a0 + a1 j + a2 j²`.
    fn right_tail_moment(&self, h: i64, a: &[Rational; 3]) -> Rational {
        let base = &self.right.coef * rpow(&self.right.ratio, h - self.hi());
        let s = geometric_moments(&self.right.ratio);
        base * (&a[0] * &s[0] + &a[1] * &s[1] + &a[2] * &s[2])
    }

    /// `Σ_{j≥1} w(l−j)·p(j)` for `l ≤ lo`.
    fn left_tail_moment(&self, l: i64, a: &[Rational; 3]) -> Rational {
        let base = &self.left.coef * rpow(&self.left.ratio, self.lo - l);
        let s = geometric_moments(&self.left.ratio);
        base * (&a[0] * &s[0] + &a[1] * &s[1] + &a[2] * &s[2])
    }

    /// `Σₖ w(k)s(k)`, exact.
    pub fn weighted_sum(&self, s: &EcSeq) -> Scalar {
        let l = self.lo.min(s.lo());
        let h = self.hi().max(s.hi());
        let mut acc = Scalar::zero();
        for k in l..=h {
            let wk = self.weight(k);
            if !wk.is_zero() {
                acc += &s.get(k).scale(&wk);
            }
        }
        let one = [Rational::one(), Rational::zero(), Rational::zero()];
        acc += &s.right().scale(&self.right_tail_moment(h, &one));
        acc += &s.left().scale(&self.left_tail_moment(l, &one));
        acc
    }

    /// `Σₖ w(k)|s(k)|²` for an eventually-linear `s`, exact.
    pub fn weighted_sq_sum(&self, s: &ElSeq) -> Rational {
        let (alo, ahi) = s.affine_span();
        let l = self.lo.min(alo);
        let h = self.hi().max(ahi);
        let vals = s.values(l, h);
        let mut acc = Rational::zero();
        for (k, v) in (l..=h).zip(vals.iter()) {
            acc += self.weight(k) * v.norm_sqr();
        }
        let (sl, sr) = s.tail_slopes();
        // |A + Bj|² = |A|² + 2 Re(A B̄) j + |B|² j²
        let moments = |a: &Scalar, b: &Scalar| -> [Rational; 3] {
            [a.norm_sqr(), rat_int(2) * (a * &b.conj()).re, b.norm_sqr()]
        };
        acc += self.right_tail_moment(h, &moments(&vals[vals.len() - 1], sr));
        acc += self.left_tail_moment(l, &moments(&vals[0], &-sl));
        acc
    }

    pub fn weighted_sq_sum_ec(&self, s: &EcSeq) -> Rational {
        self.weighted_sum(&s.map(|v| Scalar::real(v.norm_sqr()))).re
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vals = |v: &[Rational]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        match &self.family {
            WeightFamily::Geometric { q } => write!(f, "geometric(q={q})"),
            WeightFamily::Finite => write!(f, "finite(lo={}, values=[{}])", self.lo, vals(&self.window)),
            WeightFamily::CustomGeometricTails => write!(
                f,
                "custom(lo={}, values=[{}], left_coef={}, left_q={}, right_coef={}, right_q={})",
                self.lo,
                vals(&self.window),
                self.left.coef,
                self.left.ratio,
                self.right.coef,
                self.right.ratio
            ),
        }
    }
}

/// `±∞` end of `ℤ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub fn limit<'a>(&self, s: &'a EcSeq) -> &'a Scalar {
        match self {
            Side::Plus => s.right(),
            Side::Minus => s.left(),
        }
    }

    pub fn slope<'a>(&self, s: &'a ElSeq) -> &'a Scalar {
        let (l, r) = s.tail_slopes();
        match self {
            Side::Plus => r,
            Side::Minus => l,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        })
    }
}

/// `τ = λ₊τ_{+∞} + λ₋τ_{−∞} + λ₀ Σ w(k)τ_k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateSpec {
    pub lambda0: Rational,
    pub lambda_plus: Rational,
    pub lambda_minus: Rational,
    pub weights: WeightSpec,
}

impl StateSpec {
    pub fn new(lambda0: Rational, lambda_plus: Rational, lambda_minus: Rational, weights: WeightSpec) -> Result<Self> {
        for (name, v) in [("lambda0", &lambda0), ("lambda_plus", &lambda_plus), ("lambda_minus", &lambda_minus)] {
            if v.is_negative() {
                return Err(QalError::InvalidParameter(format!("{name} must be nonnegative, got {v}")));
            }
        }
        let total = &lambda0 + &lambda_plus + &lambda_minus;
        if !total.is_one() {
            return Err(QalError::InvalidParameter(format!("state coefficients sum to {total}, expected 1")));
        }
        Ok(StateSpec { lambda0, lambda_plus, lambda_minus, weights })
    }

    pub fn tau_w(weights: WeightSpec) -> Self {
        StateSpec { lambda0: Rational::one(), lambda_plus: Rational::zero(), lambda_minus: Rational::zero(), weights }
    }

    pub fn tau_k(k: i64) -> Self {
        StateSpec::tau_w(WeightSpec::point(k))
    }

    pub fn tau_inf(side: Side) -> Self {
        let (p, m) = match side {
            Side::Plus => (Rational::one(), Rational::zero()),
            Side::Minus => (Rational::zero(), Rational::one()),
        };
        StateSpec { lambda0: Rational::zero(), lambda_plus: p, lambda_minus: m, weights: WeightSpec::point(0) }
    }

    /// `τ(a*a) > 0` for every nonzero `a`.
    pub fn is_faithful(&self) -> bool {
        self.lambda0.is_one() && self.weights.is_faithful()
    }
}

pub fn state_eval(s: &StateSpec, a: &AlgebraElement) -> Scalar {
    let a0 = a.expectation();
    let mut acc = a0.right().scale(&s.lambda_plus) + a0.left().scale(&s.lambda_minus);
    if !s.lambda0.is_zero() {
        acc += &s.weights.weighted_sum(&a0).scale(&s.lambda0);
    }
    acc
}

/// `‖a‖²_{τ_w} = Σₙ Σₖ w(k)|aₙ(k)|²`.
pub fn gns_norm_w_sq(a: &AlgebraElement, w: &WeightSpec) -> Rational {
    a.terms().map(|(_, an)| w.weighted_sq_sum_ec(an)).sum()
}

pub fn gns_norm_w(a: &AlgebraElement, w: &WeightSpec) -> f64 {
    crate::scalar::rat_to_f64(&gns_norm_w_sq(a, w)).sqrt()
}

/// `Σₙ Uⁿ gₙ(𝕂)` with eventually-linear coefficients; the range of the
/// weighted implementations.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct LinearElement {
    terms: BTreeMap<i64, ElSeq>,
}

impl LinearElement {
    pub fn zero() -> Self {
        LinearElement::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, ElSeq)>) -> Self {
        let mut out = LinearElement::zero();
        for (n, g) in terms {
            out.add_term(n, g);
        }
        out
    }

    fn add_term(&mut self, n: i64, g: ElSeq) {
        let sum = match self.terms.remove(&n) {
            Some(h) => h.add(&g),
            None => g,
        };
        if !sum.is_zero() {
            self.terms.insert(n, sum);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &ElSeq)> {
        self.terms.iter().map(|(n, g)| (*n, g))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &LinearElement) -> Self {
        let mut out = self.clone();
        for (n, g) in other.terms() {
            out.add_term(n, g.clone());
        }
        out
    }

    pub fn sub(&self, other: &LinearElement) -> Self {
        self.add(&LinearElement::from_terms(other.terms().map(|(n, g)| (n, g.neg()))))
    }

    /// `a·g` for `a ∈ 𝒜`: `(Uⁿaₙ)(Uᵐgₘ) = U^{n+m} aₙ(𝕂+m) gₘ(𝕂)`.
    pub fn left_mul(&self, a: &AlgebraElement) -> Self {
        let mut out = LinearElement::zero();
        for (n, an) in a.terms() {
            for (m, gm) in self.terms() {
                out.add_term(n + m, gm.mul_ec(&an.shift(m)));
            }
        }
        out
    }

    pub fn norm_sq(&self, w: &WeightSpec) -> Rational {
        self.terms().map(|(_, g)| w.weighted_sq_sum(g)).sum()
    }
}

impl From<&AlgebraElement> for LinearElement {
    fn from(a: &AlgebraElement) -> Self {
        LinearElement::from_terms(a.terms().map(|(n, an)| (n, ElSeq::from_ec(an))))
    }
}

impl fmt::Debug for LinearElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(n, g)| format!("U^{n}·{g}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

/// Finitely supported vector: basis coefficients in `ℓ²(ℤ)` or Fourier
/// coefficients in `L²(S¹)`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct FiniteVector {
    coeffs: BTreeMap<i64, Scalar>,
}

impl FiniteVector {
    pub fn zero() -> Self {
        FiniteVector::default()
    }

    pub fn basis(k: i64) -> Self {
        FiniteVector::from_entries([(k, Scalar::one())])
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (i64, Scalar)>) -> Self {
        let mut v = FiniteVector::zero();
        for (k, c) in entries {
            v.add_at(k, c);
        }
        v
    }

    pub fn add_at(&mut self, k: i64, c: Scalar) {
        let sum = match self.coeffs.remove(&k) {
            Some(x) => x + c,
            None => c,
        };
        if !sum.is_zero() {
            self.coeffs.insert(k, sum);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (i64, &Scalar)> {
        self.coeffs.iter().map(|(k, c)| (*k, c))
    }

    pub fn get(&self, k: i64) -> Scalar {
        self.coeffs.get(&k).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sub(&self, other: &FiniteVector) -> Self {
        let mut out = self.clone();
        for (k, c) in other.entries() {
            out.add_at(k, -c);
        }
        out
    }

    pub fn norm_sq(&self) -> Rational {
        self.coeffs.values().map(Scalar::norm_sqr).sum()
    }
}

impl fmt::Debug for FiniteVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.coeffs.iter()).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum DerivationKind {
    Invariant,
    Covariant,
}

/// GNS space in which an implementation acts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GnsModel {
    /// Faithful weighted state `τ_w`.
    Weighted(WeightSpec),
    /// `τ₀` on `ℓ²(ℤ)`.
    Tau0,
    /// `τ_±∞` on `L²(S¹)`.
    TauInf(Side),
}

impl GnsModel {
    /// `π(a)x` in the `τ₀` or `τ_±∞` model.
    pub fn represent(&self, a: &AlgebraElement, x: &FiniteVector) -> FiniteVector {
        let mut out = FiniteVector::zero();
        for (n, an) in a.terms() {
            for (k, c) in x.entries() {
                let coeff = match self {
                    GnsModel::TauInf(side) => side.limit(an),
                    _ => an.get(k),
                };
                out.add_at(k + n, coeff * c);
            }
        }
        out
    }

    /// Image of `a` under the cyclic map `a ↦ [a]`.
    pub fn cyclic_vector(&self, a: &AlgebraElement) -> FiniteVector {
        self.represent(a, &FiniteVector::basis(0))
    }
}

/// An implementation `D` of an invariant or covariant derivation.
///
/// The weighted models use `D f = β(𝕂)f − f α(𝕂)` (invariant) and
/// `D f = Uβ(𝕂)f − f Uα(𝕂)` (covariant). In the `τ₀` and `τ_±∞` models
/// `α` is unused and `c` is the free constant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplementationSpec {
    pub derivation: DerivationKind,
    pub model: GnsModel,
    pub beta: ElSeq,
    pub alpha: ElSeq,
    pub c: Scalar,
}

impl ImplementationSpec {
    pub fn kind_name(&self) -> &'static str {
        match (&self.model, self.derivation) {
            (GnsModel::Weighted(_), DerivationKind::Invariant) => "invariant_w",
            (GnsModel::Weighted(_), DerivationKind::Covariant) => "covariant_w",
            (GnsModel::Tau0, _) => "tau0",
            (GnsModel::TauInf(_), _) => "tau_pm_inf",
        }
    }

    /// The derivation being implemented.
    pub fn derivation_image(&self, a: &AlgebraElement) -> AlgebraElement {
        match self.derivation {
            DerivationKind::Invariant => apply_invariant(&InvariantDerivation::new(self.beta.clone()), a),
            DerivationKind::Covariant => apply_covariant(&CovariantDerivation::new(self.beta.clone()), a),
        }
    }

    /// `η = β − α`, so that `D(I) = η(𝕂)` (or `Uη(𝕂)`) in the weighted models.
    pub fn eta(&self) -> ElSeq {
        self.beta.sub(&self.alpha)
    }

    /// `Σ w(k)|η(k)|²`, exact; `None` outside the weighted models.
    pub fn eta_norm_sq(&self) -> Option<Rational> {
        match &self.model {
            GnsModel::Weighted(w) => Some(w.weighted_sq_sum(&self.eta())),
            _ => None,
        }
    }

    /// `D f` for `f ∈ 𝒜` in a weighted model.
    pub fn apply(&self, f: &AlgebraElement) -> Result<LinearElement> {
        if !matches!(self.model, GnsModel::Weighted(_)) {
            return Err(QalError::InvalidParameter(format!(
                "{} acts on finite vectors, not on algebra elements",
                self.kind_name()
            )));
        }
        Ok(LinearElement::from_terms(f.terms().map(|(n, fn_)| match self.derivation {
            // Uⁿ (β(k+n) − α(k)) fₙ(k)
            DerivationKind::Invariant => (n, self.beta.shift(n).sub(&self.alpha).mul_ec(fn_)),
            // U^{n+1} (β(k+n) fₙ(k) − α(k) fₙ(k+1))
            DerivationKind::Covariant => (
                n + 1,
                self.beta.shift(n).mul_ec(fn_).sub(&self.alpha.mul_ec(&fn_.shift(1))),
            ),
        })))
    }

    /// `D x` for a finite vector in the `τ₀` or `τ_±∞` model.
    pub fn apply_vector(&self, x: &FiniteVector) -> Result<FiniteVector> {
        let model = implement_diag_models(self)?;
        let step = i64::from(model.shifted);
        Ok(FiniteVector::from_entries(
            x.entries().map(|(k, c)| (k + step, model.symbol.eval(k) * c)),
        ))
    }

    /// `[D, π(a)]f − π(d(a))f` in a weighted model; zero for a valid implementation.
    pub fn contract_defect(&self, a: &AlgebraElement, f: &AlgebraElement) -> Result<LinearElement> {
        let lhs = self.apply(&a.mul(f))?.sub(&self.apply(f)?.left_mul(a));
        Ok(lhs.sub(&LinearElement::from(&self.derivation_image(a).mul(f))))
    }

    /// `[D, π(a)]x − π(d(a))x` in the `τ₀` or `τ_±∞` model.
    pub fn contract_defect_vector(&self, a: &AlgebraElement, x: &FiniteVector) -> Result<FiniteVector> {
        let model = &self.model;
        let lhs = self
            .apply_vector(&model.represent(a, x))?
            .sub(&model.represent(a, &self.apply_vector(x)?));
        Ok(lhs.sub(&model.represent(&self.derivation_image(a), x)))
    }
}

/// Diagonal (or shift-times-diagonal) form of an implementation in the
/// `τ₀` and `τ_±∞` models: `D e_k = λ(k) e_{k+s}` with `s ∈ {0, 1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagModel {
    pub symbol: ElSeq,
    /// `true` when `D` raises the index by one (covariant case).
    pub shifted: bool,
}

impl DiagModel {
    pub fn value(&self, k: i64) -> Scalar {
        self.symbol.eval(k)
    }

    /// Eigenvalue (unshifted) or singular value (shifted) moduli at `k`.
    pub fn modulus(&self, k: i64) -> f64 {
        self.value(k).abs_f64()
    }
}

/// `λ(k) = β(k) − β(0) + c` for `τ₀`, `λ(n) = β_±∞ n + c` for `τ_±∞`; the
/// covariant `τ₀` model is the weighted shift `E_k ↦ β(k)E_{k+1}`.
pub fn implement_diag_models(spec: &ImplementationSpec) -> Result<DiagModel> {
    let c = ElSeq::constant(spec.c.clone());
    match (&spec.model, spec.derivation) {
        (GnsModel::Tau0, DerivationKind::Invariant) => Ok(DiagModel {
            symbol: InvariantDerivation::new(spec.beta.clone()).beta().add(&c),
            shifted: false,
        }),
        (GnsModel::Tau0, DerivationKind::Covariant) => Ok(DiagModel { symbol: spec.beta.clone(), shifted: true }),
        (GnsModel::TauInf(side), kind) => Ok(DiagModel {
            symbol: ElSeq::linear(side.slope(&spec.beta).clone()).add(&c),
            shifted: kind == DerivationKind::Covariant,
        }),
        (GnsModel::Weighted(_), _) => Err(QalError::InvalidParameter(
            "weighted implementations are not diagonal in the basis".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement as A;
    use crate::sample::Sampler;
    use crate::scalar::ratio;

    fn s(v: i64) -> Scalar {
        Scalar::int(v)
    }

    #[test]
    fn state_examples() {
        let half = ratio(1, 2);
        let ur = A::u_r(&half).unwrap();
        let ursur = ur.star().mul(&ur);
        assert_eq!(state_eval(&StateSpec::tau_k(0), &ursur), s(1));
        assert_eq!(state_eval(&StateSpec::tau_inf(Side::Minus), &ursur), Scalar::frac(1, 4));
        let w = WeightSpec::geometric(half.clone()).unwrap();
        let p_nonneg = A::diag(EcSeq::indicator_ge(0));
        assert_eq!(state_eval(&StateSpec::tau_w(w.clone()), &p_nonneg), Scalar::frac(2, 3));
        assert_eq!(w.weight(0), ratio(1, 3));
        assert_eq!(w.weight(-2), ratio(1, 12));
    }

    #[test]
    fn gns_norm_examples() {
        let w = WeightSpec::geometric(ratio(1, 2)).unwrap();
        assert!(gns_norm_w_sq(&A::identity(), &w).is_one());
        assert!(gns_norm_w_sq(&A::u(), &w).is_one());
        assert_eq!(gns_norm_w_sq(&A::projection(0), &w), ratio(1, 3));
        let f = WeightSpec::finite(-1, vec![ratio(1, 4), ratio(1, 2), ratio(1, 4)]).unwrap();
        assert!(gns_norm_w_sq(&A::identity(), &f).is_one());
        assert!(!f.is_faithful());
    }

    #[test]
    fn weight_validation() {
        assert!(WeightSpec::geometric(ratio(3, 2)).is_err());
        assert!(matches!(
            WeightSpec::finite(0, vec![ratio(1, 2)]),
            Err(QalError::WeightNotNormalized { .. })
        ));
        let tail = GeoTail { coef: ratio(1, 4), ratio: ratio(1, 2) };
        let c = WeightSpec::custom(0, vec![ratio(1, 2)], tail.clone(), tail).unwrap();
        assert!(c.is_faithful());
        assert_eq!(c.weight(3), ratio(1, 32));
    }

    #[test]
    fn weighted_square_sum_matches_truncation() {
        let w = WeightSpec::geometric(ratio(1, 3)).unwrap();
        let beta = ElSeq::abs_plus(s(1));
        let exact = w.weighted_sq_sum(&beta);
        let approx: f64 = (-200..=200)
            .map(|k| crate::scalar::rat_to_f64(&(w.weight(k) * beta.eval(k).norm_sqr())))
            .sum();
        assert!((crate::scalar::rat_to_f64(&exact) - approx).abs() < 1e-12);
        let mut sampler = Sampler::new(5);
        for _ in 0..20 {
            let g = sampler.el_seq();
            let direct: f64 = (-300..=300)
                .map(|k| crate::scalar::rat_to_f64(&(w.weight(k) * g.eval(k).norm_sqr())))
                .sum();
            let closed = crate::scalar::rat_to_f64(&w.weighted_sq_sum(&g));
            assert!((closed - direct).abs() < 1e-9 * (1.0 + direct), "{g}: {closed} vs {direct}");
        }
    }

    fn spec(derivation: DerivationKind, model: GnsModel) -> ImplementationSpec {
        ImplementationSpec {
            derivation,
            model,
            beta: ElSeq::abs_plus(s(2)),
            alpha: ElSeq::linear(Scalar::frac(1, 2)),
            c: Scalar::frac(3, 2),
        }
    }

    #[test]
    fn implement_examples() {
        let w = WeightSpec::geometric(ratio(1, 2)).unwrap();
        let beta = ElSeq::linear(s(1));
        let sp = ImplementationSpec {
            derivation: DerivationKind::Invariant,
            model: GnsModel::Weighted(w.clone()),
            beta: beta.clone(),
            alpha: beta.clone(),
            c: Scalar::zero(),
        };
        assert!(sp.apply(&A::diag(EcSeq::delta(3))).unwrap().is_zero());
        assert_eq!(sp.apply(&A::u_pow(3)).unwrap(), LinearElement::from(&A::u_pow(3).scale(&s(3))));
        let cov = ImplementationSpec { derivation: DerivationKind::Covariant, alpha: ElSeq::zero(), ..sp };
        assert_eq!(
            cov.apply(&A::identity()).unwrap(),
            LinearElement::from_terms([(1, beta.clone())])
        );
        assert_eq!(cov.eta_norm_sq(), Some(w.weighted_sq_sum(&beta)));
    }

    #[test]
    fn diag_model_examples() {
        let mut sp = spec(DerivationKind::Invariant, GnsModel::Tau0);
        sp.beta = ElSeq::abs_plus(s(0));
        sp.c = Scalar::zero();
        let m = implement_diag_models(&sp).unwrap();
        assert!((-5..=5).all(|k| m.value(k) == s(k.abs())));
        sp.model = GnsModel::TauInf(Side::Plus);
        sp.beta = ElSeq::linear(s(2));
        sp.c = s(1);
        let m = implement_diag_models(&sp).unwrap();
        assert!((-5..=5).all(|n| m.value(n) == s(2 * n + 1)));
        sp.model = GnsModel::Tau0;
        sp.derivation = DerivationKind::Covariant;
        sp.beta = ElSeq::linear(s(1));
        let m = implement_diag_models(&sp).unwrap();
        assert!(m.shifted && (-5..=5).all(|k| m.modulus(k) == k.abs() as f64));
    }

    #[test]
    fn contract_holds_in_every_model() {
        let w = WeightSpec::geometric(ratio(1, 4)).unwrap();
        let models = [
            GnsModel::Weighted(w),
            GnsModel::Tau0,
            GnsModel::TauInf(Side::Plus),
            GnsModel::TauInf(Side::Minus),
        ];
        let mut sampler = Sampler::new(21);
        for model in models {
            for kind in [DerivationKind::Invariant, DerivationKind::Covariant] {
                let mut sp = spec(kind, model.clone());
                for _ in 0..10 {
                    sp.beta = sampler.el_seq();
                    sp.alpha = sampler.el_seq();
                    let (a, f) = sampler.pair();
                    match &model {
                        GnsModel::Weighted(_) => assert!(sp.contract_defect(&a, &f).unwrap().is_zero()),
                        _ => {
                            let x = model.cyclic_vector(&f);
                            assert!(sp.contract_defect_vector(&a, &x).unwrap().is_zero(), "{kind:?} {model:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn positivity_and_norm_identity() {
        let mut sampler = Sampler::new(8);
        let w = WeightSpec::geometric(ratio(1, 2)).unwrap();
        let mix = StateSpec::new(ratio(1, 2), ratio(1, 3), ratio(1, 6), w.clone()).unwrap();
        for _ in 0..30 {
            let (a, b) = sampler.pair();
            let aa = a.star().mul(&a);
            assert_eq!(Scalar::real(gns_norm_w_sq(&a, &w)), state_eval(&StateSpec::tau_w(w.clone()), &aa));
            let taa = state_eval(&mix, &aa);
            let tbb = state_eval(&mix, &b.star().mul(&b));
            assert!(taa.is_real() && !taa.re.is_negative());
            let tba = state_eval(&mix, &b.star().mul(&a));
            assert!(tba.norm_sqr() <= &taa.re * &tbb.re);
        }
    }
}
