//! Invariant and covariant derivations `a ↦ [β(𝕂), a]` and `a ↦ [Uβ(𝕂), a]`.

use num_traits::Zero;

use crate::algebra::{AlgebraElement, PhasedElement};
use crate::coeffseq::{EcSeq, ElSeq};
use crate::error::{QalError, Result};
use crate::scalar::{rat_to_f64, Rational, Scalar};

/// `d(a) = [β(𝕂), a]` with `β(0) = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantDerivation {
    beta: ElSeq,
}

impl InvariantDerivation {
    /// Normalizes the additive constant away.
    pub fn new(beta: ElSeq) -> Self {
        let shift = ElSeq::constant(beta.anchor().clone());
        InvariantDerivation { beta: beta.sub(&shift) }
    }

    pub fn beta(&self) -> &ElSeq {
        &self.beta
    }

    /// `Uⁿ aₙ(𝕂) ↦ Uⁿ (β(𝕂+n) − β(𝕂)) aₙ(𝕂)`.
    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        apply_invariant(self, a)
    }

    pub fn apply_phased(&self, a: &PhasedElement) -> Result<PhasedElement> {
        a.map_linear(|t| self.apply(t))
    }
}

/// `d(a) = [Uβ(𝕂), a]`; `β` is unique, no normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovariantDerivation {
    beta: ElSeq,
}

impl CovariantDerivation {
    pub fn new(beta: ElSeq) -> Self {
        CovariantDerivation { beta }
    }

    pub fn beta(&self) -> &ElSeq {
        &self.beta
    }

    pub fn apply(&self, a: &AlgebraElement) -> AlgebraElement {
        apply_covariant(self, a)
    }

    pub fn apply_phased(&self, a: &PhasedElement) -> Result<PhasedElement> {
        a.map_linear(|t| self.apply(t))
    }

    /// `α(k) = β(k−1) − β(k)`, the symbol of `d(U*)`.
    pub fn alpha(&self) -> EcSeq {
        self.beta.difference(-1)
    }
}

pub fn apply_invariant(d: &InvariantDerivation, a: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::from_terms(a.terms().map(|(n, an)| (n, d.beta.difference(n).mul(an))))
}

/// `Uⁿ aₙ(𝕂) ↦ U^{n+1} (β(𝕂+n) aₙ(𝕂) − β(𝕂) aₙ(𝕂+1))`.
pub fn apply_covariant(d: &CovariantDerivation, a: &AlgebraElement) -> AlgebraElement {
    AlgebraElement::from_terms(a.terms().map(|(n, an)| {
        let lhs = d.beta.shift(n).mul_ec(an);
        let rhs = d.beta.mul_ec(&an.shift(1));
        let coeff = lhs
            .sub(&rhs)
            .to_ec()
            .expect("covariant derivation maps the algebra into itself");
        (n + 1, coeff)
    }))
}

/// Recovers `β` (with `β(0) = 0`) from `d(U) = U·c(𝕂)`: `β(k) − β(k−1) = c(k−1)`.
pub fn recover_invariant(d_u: &AlgebraElement) -> Result<InvariantDerivation> {
    if let Some(n) = d_u.support().into_iter().find(|&n| n != 1) {
        return Err(QalError::NotCovariantImage { degree: n });
    }
    let c = d_u.coefficient(1).cloned().unwrap_or_else(EcSeq::zero);
    Ok(InvariantDerivation::new(ElSeq::new(Scalar::zero(), c.shift(-1))))
}

/// Recovers `β` from `d(U*) = α(𝕂)` and `d(P_{≥1}) = U·g(𝕂)` with `g = −β(0)χ₀`.
///
/// `β(0) = −g(0)` and `β(k) − β(k−1) = −α(k)`.
pub fn recover_covariant(d_ustar: &AlgebraElement, d_p1: &AlgebraElement) -> Result<CovariantDerivation> {
    if let Some(n) = d_ustar.support().into_iter().find(|&n| n != 0) {
        return Err(QalError::InconsistentData(format!(
            "d(U*) must be diagonal, found a degree {n} term"
        )));
    }
    if let Some(n) = d_p1.support().into_iter().find(|&n| n != 1) {
        return Err(QalError::InconsistentData(format!(
            "d(P>=1) must be U·g(K), found a degree {n} term"
        )));
    }
    let alpha = d_ustar.expectation();
    let g = d_p1.coefficient(1).cloned().unwrap_or_else(EcSeq::zero);
    let g0 = g.get(0).clone();
    if g != EcSeq::delta(0).scale(&g0) {
        return Err(QalError::InconsistentData(format!(
            "d(P>=1) coefficient must be supported at k = 0, got {g}"
        )));
    }
    let beta = ElSeq::new(-g0, alpha.neg());
    let d = CovariantDerivation::new(beta);
    // the recovered symbol must reproduce both inputs
    if d.apply(&AlgebraElement::u_pow(-1)) != *d_ustar
        || d.apply(&AlgebraElement::diag(EcSeq::indicator_ge(1))) != *d_p1
    {
        return Err(QalError::InconsistentData("recovered symbol does not reproduce the data".into()));
    }
    Ok(d)
}

/// Approximate-innerness certificate for an invariant derivation.
#[derive(Clone, Debug, PartialEq)]
pub struct ApproxInnerReport {
    beta: ElSeq,
    /// Both limiting increments vanish.
    pub is_c0: bool,
}

impl ApproxInnerReport {
    /// `μ_N = β` frozen outside `[−N−1, N]`; bounded and eventually constant.
    pub fn cutoff(&self, n: i64) -> EcSeq {
        let lo = -n - 1;
        let vals = self.beta.values(lo, n);
        let left = vals[0].clone();
        let right = vals[vals.len() - 1].clone();
        EcSeq::new(left, lo, vals, right)
    }

    /// `‖d(U) − [μ_N(𝕂), U]‖²` = `sup_{|k|>N} |β(k) − β(k−1)|²`, exact.
    pub fn error_sq_at(&self, n: i64) -> Rational {
        let inc = self.beta.increments();
        let mut best = Rational::zero();
        let mut consider = |v: &Scalar| {
            let m = v.norm_sqr();
            if m > best {
                best = m;
            }
        };
        for k in inc.lo()..=inc.hi() {
            if k.abs() > n {
                consider(inc.get(k));
            }
        }
        // tails always reach |k| > N
        consider(inc.left());
        consider(inc.right());
        best
    }

    pub fn error_at(&self, n: i64) -> f64 {
        rat_to_f64(&self.error_sq_at(n)).sqrt()
    }
}

pub fn approx_inner_report(beta: &ElSeq) -> ApproxInnerReport {
    let (l, r) = beta.tail_slopes();
    ApproxInnerReport { beta: beta.clone(), is_c0: l.is_zero() && r.is_zero() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{rho, RootOfUnity};
    use crate::sample::Sampler;

    fn s(v: i64) -> Scalar {
        Scalar::int(v)
    }

    #[test]
    fn invariant_examples() {
        let d = InvariantDerivation::new(ElSeq::linear(s(1)));
        assert_eq!(d.apply(&AlgebraElement::u()), AlgebraElement::u());
        let a = AlgebraElement::diag(EcSeq::new(s(1), -2, vec![s(4), Scalar::i()], s(-3)));
        assert!(d.apply(&a).is_zero());
        let abs = InvariantDerivation::new(ElSeq::abs_plus(s(0)));
        let du2 = abs.apply(&AlgebraElement::u_pow(2));
        assert_eq!(du2, AlgebraElement::term(2, EcSeq::new(s(-2), -1, vec![s(0)], s(2))));
    }

    #[test]
    fn normalization_drops_constant() {
        let d1 = InvariantDerivation::new(ElSeq::abs_plus(s(5)));
        let d2 = InvariantDerivation::new(ElSeq::abs_plus(s(0)));
        assert_eq!(d1, d2);
        assert_eq!(d1.beta().eval(0), Scalar::zero());
    }

    #[test]
    fn covariant_examples() {
        let one = CovariantDerivation::new(ElSeq::constant(s(1)));
        assert!(one.apply(&AlgebraElement::u_pow(-1)).is_zero());
        assert!(one.apply(&AlgebraElement::u()).is_zero());
        let lin = CovariantDerivation::new(ElSeq::linear(s(1)));
        let dp0 = lin.apply(&AlgebraElement::projection(0));
        assert_eq!(dp0, AlgebraElement::term(1, EcSeq::delta(-1)));
        // basis-action oracle for d(P0) = Uβ(K)P0 − P0 Uβ(K)
        let m = dp0.basis_action(-3, 3).unwrap();
        assert_eq!(m.get(0, -1), &s(1));
        // d(U) = −U² α(K+1)
        let du = lin.apply(&AlgebraElement::u());
        let expect = AlgebraElement::term(2, lin.alpha().shift(1).neg());
        assert_eq!(du, expect);
    }

    #[test]
    fn recover_invariant_examples() {
        let d = recover_invariant(&AlgebraElement::u()).unwrap();
        assert_eq!(d.beta(), &ElSeq::linear(s(1)));
        assert!(recover_invariant(&AlgebraElement::zero()).unwrap().beta().is_zero());
        let sign = EcSeq::step(0, s(-1), s(1));
        let d = recover_invariant(&AlgebraElement::term(1, sign.clone())).unwrap();
        for k in -5..=5 {
            assert_eq!(d.beta().eval(k), s(k.abs()));
        }
        assert_eq!(d.apply(&AlgebraElement::u()), AlgebraElement::term(1, sign));
        assert_eq!(
            recover_invariant(&AlgebraElement::u_pow(2)),
            Err(QalError::NotCovariantImage { degree: 2 })
        );
    }

    #[test]
    fn recover_covariant_examples() {
        let d = CovariantDerivation::new(ElSeq::linear(s(1)));
        let dus = d.apply(&AlgebraElement::u_pow(-1));
        let dp1 = d.apply(&AlgebraElement::diag(EcSeq::indicator_ge(1)));
        assert_eq!(recover_covariant(&dus, &dp1).unwrap(), d);

        let c = Scalar::frac(-5, 2);
        let dp1 = AlgebraElement::term(1, EcSeq::delta(0).scale(&c)).neg();
        let rec = recover_covariant(&AlgebraElement::zero(), &dp1).unwrap();
        assert_eq!(rec.beta(), &ElSeq::constant(c));

        let bad = AlgebraElement::u().add(&AlgebraElement::diag(EcSeq::one()));
        assert!(matches!(recover_covariant(&bad, &dp1), Err(QalError::InconsistentData(_))));
        let spread = AlgebraElement::term(1, EcSeq::delta(2));
        assert!(matches!(recover_covariant(&AlgebraElement::zero(), &spread), Err(QalError::InconsistentData(_))));
    }

    #[test]
    fn approx_inner_examples() {
        let lin = approx_inner_report(&ElSeq::linear(s(1)));
        assert!(!lin.is_c0);
        for n in 0..6 {
            assert_eq!(lin.error_at(n), 1.0);
        }
        let bump = ElSeq::new(s(0), EcSeq::new(s(0), -1, vec![s(1), s(2), s(1)], s(0)));
        let rep = approx_inner_report(&bump);
        assert!(rep.is_c0);
        assert_eq!(rep.error_at(2), 0.0);
        assert_eq!(rep.error_at(0), 1.0);
        let zero = approx_inner_report(&ElSeq::zero());
        assert!(zero.is_c0 && zero.error_at(0) == 0.0 && zero.cutoff(3).is_zero());
    }

    #[test]
    fn error_is_exact_distance_on_generator() {
        let mut sampler = Sampler::new(3);
        for _ in 0..20 {
            let beta = sampler.el_seq();
            let rep = approx_inner_report(&beta);
            let d = InvariantDerivation::new(beta.clone());
            let du = d.apply(&AlgebraElement::u());
            let mut prev: Option<Rational> = None;
            for n in 0..8 {
                let mu = AlgebraElement::diag(rep.cutoff(n));
                let diff = du.sub(&mu.commutator(&AlgebraElement::u()));
                let norm = diff.coefficient(1).map(EcSeq::supnorm_sq).unwrap_or_else(Rational::zero);
                assert_eq!(norm, rep.error_sq_at(n), "beta={beta} N={n}");
                if let Some(p) = &prev {
                    assert!(&norm <= p);
                }
                prev = Some(norm);
            }
        }
    }

    #[test]
    fn leibniz_and_covariance_smoke() {
        let mut sampler = Sampler::new(11);
        let z = RootOfUnity::new(1, 3).unwrap();
        for _ in 0..10 {
            let (a, b) = sampler.pair();
            let di = InvariantDerivation::new(sampler.el_seq());
            let dc = CovariantDerivation::new(sampler.el_seq());
            assert_eq!(di.apply(&a.mul(&b)), a.mul(&di.apply(&b)).add(&di.apply(&a).mul(&b)));
            assert_eq!(dc.apply(&a.mul(&b)), a.mul(&dc.apply(&b)).add(&dc.apply(&a).mul(&b)));
            let lhs = dc.apply_phased(&rho(&a, z)).unwrap();
            let rhs = rho(&dc.apply(&a), z).times_phase(-1).unwrap();
            assert_eq!(lhs, rhs);
            assert_eq!(di.apply_phased(&rho(&a, z)).unwrap(), rho(&di.apply(&a), z));
        }
    }
}
