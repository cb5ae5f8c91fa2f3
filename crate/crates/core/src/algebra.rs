//! Exact arithmetic in the algebra of finite sums `Σₙ Uⁿ aₙ(𝕂)`.
//!
//! `U` is the bilateral shift `E_k ↦ E_{k+1}` and `a(𝕂)` the diagonal operator
//! with symbol `a`. Products follow `a(𝕂)U = U a(𝕂+1)`, i.e.
//! `(Uⁿ a(𝕂))(Uᵐ b(𝕂)) = U^{n+m} a(𝕂+m) b(𝕂)`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::coeffseq::EcSeq;
use crate::error::{QalError, Result};
use crate::scalar::{Rational, Scalar};

/// Element `Σₙ Uⁿ aₙ(𝕂)` with finitely many nonzero eventually-constant coefficients.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct AlgebraElement {
    terms: BTreeMap<i64, EcSeq>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement::default()
    }

    pub fn identity() -> Self {
        AlgebraElement::diag(EcSeq::one())
    }

    /// `Uⁿ a(𝕂)`.
    pub fn term(n: i64, a: EcSeq) -> Self {
        let mut out = AlgebraElement::zero();
        out.add_term(n, a);
        out
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (i64, EcSeq)>) -> Self {
        let mut out = AlgebraElement::zero();
        for (n, a) in terms {
            out.add_term(n, a);
        }
        out
    }

    /// Diagonal element `a(𝕂)`.
    pub fn diag(a: EcSeq) -> Self {
        AlgebraElement::term(0, a)
    }

    /// The bilateral shift.
    pub fn u() -> Self {
        AlgebraElement::term(1, EcSeq::one())
    }

    pub fn u_pow(n: i64) -> Self {
        AlgebraElement::term(n, EcSeq::one())
    }

    /// Weighted shift `U_r = U·a(𝕂)`, `a(k) = r` for `k < 0` and `1` for `k ≥ 0`.
    pub fn u_r(r: &Rational) -> Result<Self> {
        if !(r.is_positive() && r < &Rational::one()) {
            return Err(QalError::InvalidParameter(format!("r must lie in (0,1), got {r}")));
        }
        Ok(AlgebraElement::term(1, EcSeq::step(0, Scalar::real(r.clone()), Scalar::one())))
    }

    /// Orthogonal projection onto `E_k`.
    pub fn projection(k: i64) -> Self {
        AlgebraElement::diag(EcSeq::delta(k))
    }

    fn add_term(&mut self, n: i64, a: EcSeq) {
        let merged = match self.terms.remove(&n) {
            Some(old) => old.add(&a),
            None => a,
        };
        if !merged.is_zero() {
            self.terms.insert(n, merged);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &EcSeq)> {
        self.terms.iter().map(|(n, a)| (*n, a))
    }

    pub fn coefficient(&self, n: i64) -> Option<&EcSeq> {
        self.terms.get(&n)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn support(&self) -> Vec<i64> {
        self.terms.keys().copied().collect()
    }

    /// `max |n|` over the support (0 for the zero element).
    pub fn max_shift(&self) -> i64 {
        self.terms.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &AlgebraElement) -> Self {
        let mut out = self.clone();
        for (n, a) in other.terms() {
            out.add_term(n, a.clone());
        }
        out
    }

    pub fn sub(&self, other: &AlgebraElement) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coefficients(EcSeq::neg)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map_coefficients(|a| a.scale(c))
    }

    pub fn map_coefficients(&self, f: impl Fn(&EcSeq) -> EcSeq) -> Self {
        AlgebraElement::from_terms(self.terms().map(|(n, a)| (n, f(a))))
    }

    pub fn mul(&self, other: &AlgebraElement) -> Self {
        let mut out = AlgebraElement::zero();
        for (n, a) in self.terms() {
            for (m, b) in other.terms() {
                out.add_term(n + m, a.shift(m).mul(b));
            }
        }
        out
    }

    pub fn commutator(&self, other: &AlgebraElement) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Adjoint in the defining representation:
    /// `(Uⁿ a(𝕂))* = U^{−n} ā(𝕂−n)`.
    pub fn star(&self) -> Self {
        AlgebraElement::from_terms(self.terms().map(|(n, a)| (-n, a.conj().shift(-n))))
    }

    /// Conditional expectation onto the diagonal: the degree-zero coefficient.
    pub fn expectation(&self) -> EcSeq {
        self.terms.get(&0).cloned().unwrap_or_else(EcSeq::zero)
    }

    /// Triangle-inequality bound `Σₙ sup|aₙ|` on the operator norm; exact for one term.
    pub fn norm_bound(&self) -> f64 {
        self.terms.values().map(EcSeq::supnorm).sum()
    }

    /// Matrix of the element on `span{E_k : lo ≤ k ≤ hi}` in the defining representation.
    pub fn basis_action(&self, lo: i64, hi: i64) -> Result<WindowMatrix> {
        if lo > hi {
            return Err(QalError::InvalidParameter(format!("empty window [{lo}, {hi}]")));
        }
        let size = (hi - lo + 1) as usize;
        let mut m = WindowMatrix::zeros(lo, hi, self.max_shift());
        for (n, a) in self.terms() {
            for k in lo..=hi {
                let j = k + n;
                if (lo..=hi).contains(&j) {
                    m.entries[(j - lo) as usize * size + (k - lo) as usize] = a.get(k).clone();
                }
            }
        }
        Ok(m)
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (n, a)) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "U^{n}·{a}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact dense matrix of an operator restricted to a window of basis vectors.
///
/// `get(j, k)` is the coefficient of `E_j` in `a·E_k`. Columns within
/// `edge_margin` of either end are affected by truncation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WindowMatrix {
    lo: i64,
    hi: i64,
    edge_margin: i64,
    entries: Vec<Scalar>,
}

impl WindowMatrix {
    pub fn zeros(lo: i64, hi: i64, edge_margin: i64) -> Self {
        let size = (hi - lo + 1) as usize;
        WindowMatrix { lo, hi, edge_margin, entries: vec![Scalar::zero(); size * size] }
    }

    pub fn size(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn edge_margin(&self) -> i64 {
        self.edge_margin
    }

    pub fn get(&self, j: i64, k: i64) -> &Scalar {
        let size = self.size();
        &self.entries[(j - self.lo) as usize * size + (k - self.lo) as usize]
    }

    pub fn is_edge_column(&self, k: i64) -> bool {
        k - self.lo < self.edge_margin || self.hi - k < self.edge_margin
    }

    /// Columns whose distance to both window ends is at least `margin`.
    pub fn interior_columns(&self, margin: i64) -> std::ops::RangeInclusive<i64> {
        (self.lo + margin)..=(self.hi - margin)
    }

    /// Exact product; zero entries are skipped. Edge margins add.
    pub fn matmul(&self, other: &WindowMatrix) -> WindowMatrix {
        assert_eq!(self.window(), other.window(), "window mismatch");
        let size = self.size();
        let mut out = WindowMatrix::zeros(self.lo, self.hi, self.edge_margin + other.edge_margin);
        for i in 0..size {
            for k in 0..size {
                let b = &other.entries[i * size + k];
                if b.is_zero() {
                    continue;
                }
                for j in 0..size {
                    let a = &self.entries[j * size + i];
                    if !a.is_zero() {
                        out.entries[j * size + k] += &(a * b);
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> WindowMatrix {
        let size = self.size();
        let mut out = WindowMatrix::zeros(self.lo, self.hi, self.edge_margin);
        for j in 0..size {
            for k in 0..size {
                out.entries[k * size + j] = self.entries[j * size + k].conj();
            }
        }
        out
    }

    /// True when the two matrices agree on every column in `cols`.
    pub fn columns_equal(&self, other: &WindowMatrix, cols: std::ops::RangeInclusive<i64>) -> bool {
        cols.into_iter()
            .all(|k| (self.lo..=self.hi).all(|j| self.get(j, k) == other.get(j, k)))
    }

    pub fn to_c64(&self) -> Vec<Vec<Complex64>> {
        let size = self.size();
        (0..size)
            .map(|j| (0..size).map(|k| self.entries[j * size + k].to_c64()).collect())
            .collect()
    }
}

/// `z = exp(2πi·num/den)`, kept reduced with `den ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RootOfUnity {
    num: i64,
    den: i64,
}

impl RootOfUnity {
    pub fn new(num: i64, den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(QalError::InvalidParameter(format!("root of unity needs a positive order, got {den}")));
        }
        let g = num.gcd(&den);
        let (num, den) = (num / g, den / g);
        Ok(RootOfUnity { num: num.rem_euclid(den), den })
    }

    pub fn one() -> Self {
        RootOfUnity { num: 0, den: 1 }
    }

    pub fn num(&self) -> i64 {
        self.num
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    /// Exponent period modulo the Gaussian units: powers `z^{m·t}` are in `{±1, ±i}`.
    fn gaussian_period(&self) -> i64 {
        self.den / self.den.gcd(&4)
    }

    /// Writes `z^e = unit · z^r` with `unit ∈ {±1, ±i}` and `0 ≤ r < period`.
    /// The pair is unique, which makes phased elements canonical.
    pub fn split_power(&self, e: i64) -> (i64, Scalar) {
        let m = self.gaussian_period();
        let g = self.den.gcd(&4);
        let t = e.div_euclid(m);
        let r = e.rem_euclid(m);
        // z^{m t} = exp(2πi num t / g) = i^{4 num t / g}
        let quarter_turns = (4 / g) * self.num * t;
        (r, Scalar::i_pow(quarter_turns))
    }

    /// `z^e` when it is a Gaussian unit.
    pub fn gaussian_power(&self, e: i64) -> Option<Scalar> {
        match self.split_power(e) {
            (0, unit) => Some(unit),
            _ => None,
        }
    }

    pub fn inverse(&self) -> Self {
        RootOfUnity { num: (-self.num).rem_euclid(self.den), den: self.den }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::from_polar(1.0, std::f64::consts::TAU * self.num as f64 / self.den as f64)
    }
}

/// Unit phase `z = e^{iθ}`: exact roots of unity or an arbitrary double-precision angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum UnitPhase {
    Root(RootOfUnity),
    Angle(f64),
}

impl UnitPhase {
    pub fn to_c64(&self) -> Complex64 {
        match self {
            UnitPhase::Root(z) => z.to_c64(),
            UnitPhase::Angle(theta) => Complex64::from_polar(1.0, *theta),
        }
    }
}

/// Element `Σₙ z^{eₙ} Uⁿ aₙ(𝕂)` for a fixed root of unity `z`.
///
/// Each degree carries one exponent, reduced by [`RootOfUnity::split_power`],
/// so equality is decidable without irrational arithmetic. This is the exact
/// home of `ρ_θ(a)` for roots of unity of any order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PhasedElement {
    phase: RootOfUnity,
    terms: BTreeMap<i64, (i64, EcSeq)>,
}

impl PhasedElement {
    pub fn new(phase: RootOfUnity) -> Self {
        PhasedElement { phase, terms: BTreeMap::new() }
    }

    pub fn phase(&self) -> RootOfUnity {
        self.phase
    }

    /// Adds `z^e Uⁿ a(𝕂)`. Fails if degree `n` already carries a different phase.
    pub fn add_term(&mut self, n: i64, e: i64, a: EcSeq) -> Result<()> {
        let (r, unit) = self.phase.split_power(e);
        let a = a.scale(&unit);
        if a.is_zero() {
            return Ok(());
        }
        match self.terms.remove(&n) {
            None => {
                self.terms.insert(n, (r, a));
            }
            Some((r0, old)) if r0 == r => {
                let sum = old.add(&a);
                if !sum.is_zero() {
                    self.terms.insert(n, (r, sum));
                }
            }
            Some((r0, _)) => {
                return Err(QalError::InvalidParameter(format!(
                    "degree {n} mixes phases z^{r0} and z^{r}; not representable exactly"
                )))
            }
        }
        Ok(())
    }

    /// `z^{shift}·a` with every degree `n` weighted by `z^{n·weight}`.
    pub fn from_element(a: &AlgebraElement, phase: RootOfUnity, weight: i64, shift: i64) -> Self {
        let mut out = PhasedElement::new(phase);
        for (n, c) in a.terms() {
            out.add_term(n, n * weight + shift, c.clone()).expect("distinct degrees");
        }
        out
    }

    /// Multiplies by `z^e`.
    pub fn times_phase(&self, e: i64) -> Result<Self> {
        let mut out = PhasedElement::new(self.phase);
        for (n, (r, a)) in &self.terms {
            out.add_term(*n, r + e, a.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &PhasedElement) -> Result<Self> {
        if self.phase != other.phase {
            return Err(QalError::InvalidParameter("phases differ".into()));
        }
        let mut out = PhasedElement::new(self.phase);
        for (n, (e1, a)) in &self.terms {
            for (m, (e2, b)) in &other.terms {
                out.add_term(n + m, e1 + e2, a.shift(*m).mul(b))?;
            }
        }
        Ok(out)
    }

    /// Applies a linear map termwise: `Σ z^{eₙ} f(Uⁿ aₙ)`.
    pub fn map_linear(&self, f: impl Fn(&AlgebraElement) -> AlgebraElement) -> Result<Self> {
        let mut out = PhasedElement::new(self.phase);
        for (n, (e, a)) in &self.terms {
            for (m, c) in f(&AlgebraElement::term(*n, a.clone())).terms() {
                out.add_term(m, *e, c.clone())?;
            }
        }
        Ok(out)
    }

    /// Back to a plain element when every phase is a Gaussian unit.
    pub fn to_element(&self) -> Option<AlgebraElement> {
        self.terms
            .iter()
            .map(|(n, (r, a))| (*r == 0).then(|| (*n, a.clone())))
            .collect::<Option<Vec<_>>>()
            .map(AlgebraElement::from_terms)
    }
}

/// `ρ_z(a)`: degree `n` multiplied by `zⁿ`.
pub fn rho(a: &AlgebraElement, z: RootOfUnity) -> PhasedElement {
    PhasedElement::from_element(a, z, 1, 0)
}

/// `ρ_z(a)` as a plain element; only for `z ∈ {±1, ±i}`.
pub fn rho_exact(a: &AlgebraElement, z: RootOfUnity) -> Result<AlgebraElement> {
    rho(a, z).to_element().ok_or_else(|| {
        QalError::InvalidParameter(format!("z = exp(2πi·{}/{}) is not a Gaussian unit", z.num(), z.den()))
    })
}

/// Double-precision `ρ_θ` on a window matrix: entry `(j, k)` picks up `e^{iθ(j−k)}`.
pub fn rho_matrix(m: &[Vec<Complex64>], z: UnitPhase) -> Vec<Vec<Complex64>> {
    let zc = z.to_c64();
    m.iter()
        .enumerate()
        .map(|(j, row)| {
            row.iter()
                .enumerate()
                .map(|(k, v)| v * zc.powi(j as i32 - k as i32))
                .collect()
        })
        .collect()
}

/// Named difference `lhs − rhs` from the generator identity suite.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentityResidual {
    pub name: String,
    pub residual: AlgebraElement,
}

impl IdentityResidual {
    pub fn is_zero(&self) -> bool {
        self.residual.is_zero()
    }
}

/// `U` written through the weighted shift: `c₁ U_r − c₂ U_r U_r* U_r`.
pub fn u_from_ur(r: &Rational) -> Result<AlgebraElement> {
    let ur = AlgebraElement::u_r(r)?;
    let one = Rational::one();
    let denom = (&one + r) * r;
    let c1 = (&one + r + r * r) / &denom;
    let c2 = &one / &denom;
    Ok(ur
        .scale(&Scalar::real(c1))
        .sub(&ur.mul(&ur.star()).mul(&ur).scale(&Scalar::real(c2))))
}

/// `U*` through the weighted shift: `c₁ U_r* − c₂ U_r* U_r U_r*`.
pub fn u_star_from_ur(r: &Rational) -> Result<AlgebraElement> {
    let urs = AlgebraElement::u_r(r)?.star();
    let ur = urs.star();
    let one = Rational::one();
    let denom = (&one + r) * r;
    let c1 = (&one + r + r * r) / &denom;
    let c2 = &one / &denom;
    Ok(urs
        .scale(&Scalar::real(c1))
        .sub(&urs.mul(&ur).mul(&urs).scale(&Scalar::real(c2))))
}

/// `P₀ = [U_r*, U_r]/(1 − r²)`.
pub fn p0_from_ur(r: &Rational) -> Result<AlgebraElement> {
    let ur = AlgebraElement::u_r(r)?;
    let k = Scalar::real(Rational::one() / (Rational::one() - r * r));
    Ok(ur.star().commutator(&ur).scale(&k))
}

/// `P_{≥0} = (U_r* U_r − r² I)/(1 − r²)`.
pub fn p_nonneg_from_ur(r: &Rational) -> Result<AlgebraElement> {
    let ur = AlgebraElement::u_r(r)?;
    let r2 = Scalar::real(r * r);
    let k = Scalar::real(Rational::one() / (Rational::one() - r * r));
    Ok(ur.star().mul(&ur).sub(&AlgebraElement::identity().scale(&r2)).scale(&k))
}

/// Residuals of every generator identity at parameter `r`; all are zero.
///
/// Left sides are the reference operators built directly from sequences, right
/// sides are built only from `U_r` and `U_r*`.
pub fn verify_generator_identities(r: &Rational) -> Result<Vec<IdentityResidual>> {
    let u_expr = u_from_ur(r)?;
    let us_expr = u_star_from_ur(r)?;
    let p0_expr = p0_from_ur(r)?;
    let pge_expr = p_nonneg_from_ur(r)?;
    let plt_expr = AlgebraElement::identity().sub(&pge_expr);

    let mut out = vec![
        IdentityResidual { name: "U decomposition".into(), residual: AlgebraElement::u().sub(&u_expr) },
        IdentityResidual { name: "U* decomposition".into(), residual: AlgebraElement::u_pow(-1).sub(&us_expr) },
        IdentityResidual { name: "P0 commutator".into(), residual: AlgebraElement::projection(0).sub(&p0_expr) },
        IdentityResidual {
            name: "P>=0 formula".into(),
            residual: AlgebraElement::diag(EcSeq::indicator_ge(0)).sub(&pge_expr),
        },
        IdentityResidual {
            name: "P<0 complement".into(),
            residual: AlgebraElement::diag(EcSeq::indicator_lt(0)).sub(&plt_expr),
        },
        IdentityResidual {
            name: "P<0 + P>=0 - I".into(),
            residual: plt_expr.add(&pge_expr).sub(&AlgebraElement::identity()),
        },
    ];
    for k in -3..=3i64 {
        let (fwd, back) = if k >= 0 { (&u_expr, &us_expr) } else { (&us_expr, &u_expr) };
        let mut pk = p0_expr.clone();
        for _ in 0..k.abs() {
            pk = fwd.mul(&pk).mul(back);
        }
        out.push(IdentityResidual {
            name: format!("P{k} = U^{k} P0 U^{}", -k),
            residual: AlgebraElement::projection(k).sub(&pk),
        });
    }
    Ok(out)
}

/// `(1 + r + r²)/((1 + r)r)` and `1/((1 + r)r)`.
pub fn u_decomposition_coefficients(r: &Rational) -> (Rational, Rational) {
    let one = Rational::one();
    let denom = (&one + r) * r;
    ((&one + r + r * r) / &denom, one / denom)
}

/// `1/(1−r²)`, the projection normalization.
pub fn projection_normalization(r: &Rational) -> Option<Rational> {
    let d = Rational::one() - r * r;
    (!d.is_zero()).then(|| Rational::one() / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn half() -> Rational {
        ratio(1, 2)
    }

    #[test]
    fn unitarity_of_u() {
        assert_eq!(AlgebraElement::u().mul(&AlgebraElement::u().star()), AlgebraElement::identity());
        assert_eq!(AlgebraElement::u().star(), AlgebraElement::u_pow(-1));
    }

    #[test]
    fn ur_star_ur_is_diagonal() {
        let ur = AlgebraElement::u_r(&half()).unwrap();
        let prod = ur.star().mul(&ur);
        let expect = EcSeq::step(0, Scalar::frac(1, 4), Scalar::one());
        assert_eq!(prod, AlgebraElement::diag(expect.clone()));
        assert_eq!(prod.expectation(), expect);
        // basis-action oracle on [-5, 5]
        let m = ur.basis_action(-5, 5).unwrap();
        let g = m.adjoint().matmul(&m);
        for k in -4..=4 {
            let want = if k < 0 { Scalar::frac(1, 4) } else { Scalar::one() };
            assert_eq!(g.get(k, k), &want);
        }
    }

    #[test]
    fn commutation_relation() {
        let a = EcSeq::new(Scalar::int(2), -1, vec![Scalar::int(5), Scalar::i()], Scalar::frac(1, 3));
        let lhs = AlgebraElement::diag(a.clone()).mul(&AlgebraElement::u());
        let rhs = AlgebraElement::u().mul(&AlgebraElement::diag(a.shift(1)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn star_examples() {
        let a = EcSeq::new(Scalar::i(), 0, vec![Scalar::int(3)], Scalar::frac(1, 2));
        assert_eq!(AlgebraElement::diag(a.clone()).star(), AlgebraElement::diag(a.conj()));
        let ur = AlgebraElement::u_r(&half()).unwrap();
        let lhs = ur.star().basis_action(-5, 5).unwrap();
        let rhs = ur.basis_action(-5, 5).unwrap().adjoint();
        for k in ur.basis_action(-5, 5).unwrap().interior_columns(1) {
            for j in -5..=5 {
                assert_eq!(lhs.get(j, k), rhs.get(j, k));
            }
        }
    }

    #[test]
    fn ur_action_on_basis() {
        let m = AlgebraElement::u_r(&half()).unwrap().basis_action(-3, 3).unwrap();
        assert_eq!(m.get(0, -1), &Scalar::frac(1, 2));
        assert_eq!(m.get(1, 0), &Scalar::one());
        assert!(AlgebraElement::u_r(&ratio(3, 2)).is_err());
        assert!(AlgebraElement::u_r(&ratio(0, 1)).is_err());
        assert_eq!(AlgebraElement::diag(EcSeq::delta(0)), AlgebraElement::projection(0));
    }

    #[test]
    fn basis_action_of_u_and_p0() {
        let m = AlgebraElement::u().basis_action(-2, 2).unwrap();
        for j in -2..=2 {
            for k in -2..=2 {
                let want = if j == k + 1 { Scalar::one() } else { Scalar::zero() };
                assert_eq!(m.get(j, k), &want);
            }
        }
        assert!(m.is_edge_column(2) && m.is_edge_column(-2) && !m.is_edge_column(0));
        let p = AlgebraElement::projection(0).basis_action(-2, 2).unwrap();
        for j in -2..=2 {
            for k in -2..=2 {
                let want = if j == 0 && k == 0 { Scalar::one() } else { Scalar::zero() };
                assert_eq!(p.get(j, k), &want);
            }
        }
        assert!(AlgebraElement::u().basis_action(1, 0).is_err());
    }

    #[test]
    fn generator_identities_at_half() {
        let (c1, c2) = u_decomposition_coefficients(&half());
        assert_eq!(c1, ratio(7, 3));
        assert_eq!(c2, ratio(4, 3));
        for res in verify_generator_identities(&half()).unwrap() {
            assert!(res.is_zero(), "{} left {}", res.name, res.residual);
        }
        assert_eq!(projection_normalization(&half()), Some(ratio(4, 3)));
    }

    #[test]
    fn rho_examples() {
        let minus_one = RootOfUnity::new(1, 2).unwrap();
        assert_eq!(rho_exact(&AlgebraElement::u(), minus_one).unwrap(), AlgebraElement::u().neg());
        let a = AlgebraElement::diag(EcSeq::step(0, Scalar::frac(1, 3), Scalar::int(4)));
        let z = RootOfUnity::new(1, 7).unwrap();
        assert_eq!(rho(&a, z).to_element().unwrap(), a);
        let i = RootOfUnity::new(1, 4).unwrap();
        assert_eq!(rho_exact(&AlgebraElement::u_pow(2), i).unwrap(), AlgebraElement::u_pow(2).neg());
        assert!(rho_exact(&AlgebraElement::u(), z).is_err());
        assert!(RootOfUnity::new(1, 0).is_err());
    }

    #[test]
    fn split_power_is_consistent_with_floats() {
        for (num, den) in [(1, 3), (2, 5), (1, 6), (3, 8), (1, 12), (5, 4)] {
            let z = RootOfUnity::new(num, den).unwrap();
            for e in -30..30 {
                let (r, unit) = z.split_power(e);
                let lhs = z.to_c64().powi(e as i32);
                let rhs = unit.to_c64() * z.to_c64().powi(r as i32);
                assert!((lhs - rhs).norm() < 1e-12, "z={num}/{den} e={e}");
            }
        }
    }

    #[test]
    fn rho_is_multiplicative_for_any_order() {
        let z = RootOfUnity::new(2, 5).unwrap();
        let a = AlgebraElement::u_r(&half()).unwrap().add(&AlgebraElement::u_pow(-2));
        let b = AlgebraElement::u_pow(3).mul(&AlgebraElement::diag(EcSeq::delta(1)));
        let lhs = rho(&a.mul(&b), z);
        let rhs = rho(&a, z).mul(&rho(&b, z)).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(rho(&a, RootOfUnity::one()).to_element().unwrap(), a);
    }

    #[test]
    fn rho_matrix_matches_exact_rho() {
        let a = AlgebraElement::u_r(&half()).unwrap().add(&AlgebraElement::u_pow(-2));
        let i = RootOfUnity::new(1, 4).unwrap();
        let exact = rho_exact(&a, i).unwrap().basis_action(-4, 4).unwrap().to_c64();
        let num = rho_matrix(&a.basis_action(-4, 4).unwrap().to_c64(), UnitPhase::Root(i));
        for (re, rn) in exact.iter().zip(&num) {
            for (x, y) in re.iter().zip(rn) {
                assert!((x - y).norm() < 1e-15);
            }
        }
        let th = UnitPhase::Angle(0.3);
        assert!((th.to_c64().norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let b = EcSeq::delta(2);
        let x = AlgebraElement::u().mul(&AlgebraElement::diag(EcSeq::one())).add(&AlgebraElement::diag(b.clone()));
        assert_eq!(x.expectation(), b);
        assert!(AlgebraElement::u().expectation().is_zero());
        assert!((AlgebraElement::u_r(&half()).unwrap().norm_bound() - 1.0).abs() < 1e-15);
    }
}
