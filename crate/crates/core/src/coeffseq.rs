//! Eventually-constant and eventually-linear sequences on the integers.
//!
//! [`EcSeq`] stores a finite window plus two constant tails and is kept in a
//! canonical form, so structural equality is pointwise equality. [`ElSeq`]
//! stores a value at `k = 0` plus an [`EcSeq`] of increments
//! `inc(k) = β(k) − β(k−1)`.

use std::fmt;

use num_complex::Complex64;
use num_traits::Zero;

use crate::scalar::{rat_int, Rational, Scalar};

/// Eventually-constant sequence `ℤ → ℂ`.
///
/// `value(k)` is `left` for `k < lo`, `window[k − lo]` on the window and
/// `right` past it. Canonical form: the first window entry differs from
/// `left`, the last from `right`, and a sequence with an empty window and
/// equal tails has `lo = 0`. With an empty window and unequal tails `lo`
/// is the position of the step.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EcSeq {
    left: Scalar,
    lo: i64,
    window: Vec<Scalar>,
    right: Scalar,
}

impl EcSeq {
    pub fn new(left: Scalar, lo: i64, window: Vec<Scalar>, right: Scalar) -> Self {
        let mut s = EcSeq { left, lo, window, right };
        s.canonicalize();
        s
    }

    pub fn constant(c: Scalar) -> Self {
        EcSeq::new(c.clone(), 0, Vec::new(), c)
    }

    pub fn zero() -> Self {
        EcSeq::constant(Scalar::zero())
    }

    pub fn one() -> Self {
        EcSeq::constant(Scalar::one())
    }

    /// `χ_{k}`: one at `k`, zero elsewhere.
    pub fn delta(k: i64) -> Self {
        EcSeq::new(Scalar::zero(), k, vec![Scalar::one()], Scalar::zero())
    }

    /// `left` for `k < at`, `right` for `k ≥ at`.
    pub fn step(at: i64, left: Scalar, right: Scalar) -> Self {
        EcSeq::new(left, at, Vec::new(), right)
    }

    /// Indicator of `k ≥ at`.
    pub fn indicator_ge(at: i64) -> Self {
        EcSeq::step(at, Scalar::zero(), Scalar::one())
    }

    /// Indicator of `k < at`.
    pub fn indicator_lt(at: i64) -> Self {
        EcSeq::step(at, Scalar::one(), Scalar::zero())
    }

    /// Tabulates `f` on `[lo, hi]` with the given tails.
    pub fn from_fn(lo: i64, hi: i64, left: Scalar, right: Scalar, f: impl Fn(i64) -> Scalar) -> Self {
        let window = (lo..=hi).map(f).collect();
        EcSeq::new(left, lo, window, right)
    }

    fn canonicalize(&mut self) {
        let lead = self.window.iter().take_while(|v| **v == self.left).count();
        self.window.drain(..lead);
        self.lo += lead as i64;
        while self.window.last().is_some_and(|v| *v == self.right) {
            self.window.pop();
        }
        if self.window.is_empty() && self.left == self.right {
            self.lo = 0;
        }
    }

    pub fn left(&self) -> &Scalar {
        &self.left
    }

    pub fn right(&self) -> &Scalar {
        &self.right
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Last window index; `lo − 1` for an empty window.
    pub fn hi(&self) -> i64 {
        self.lo + self.window.len() as i64 - 1
    }

    pub fn window(&self) -> &[Scalar] {
        &self.window
    }

    pub fn get(&self, k: i64) -> &Scalar {
        if k < self.lo {
            &self.left
        } else if k > self.hi() {
            &self.right
        } else {
            &self.window[(k - self.lo) as usize]
        }
    }

    pub fn is_zero(&self) -> bool {
        self.left.is_zero() && self.right.is_zero() && self.window.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.window.is_empty() && self.left == self.right
    }

    /// `(lim_{k→−∞}, lim_{k→+∞})`.
    pub fn limits(&self) -> (&Scalar, &Scalar) {
        (&self.left, &self.right)
    }

    /// Smallest `k0 ≥ 0` with the sequence constant on `k ≥ k0` and on `k ≤ −k0`.
    pub fn domain_constant(&self) -> i64 {
        if self.is_constant() {
            return 0;
        }
        (self.hi() + 1).max(1 - self.lo).max(0)
    }

    /// `sup_k |s(k)|²`, exact.
    pub fn supnorm_sq(&self) -> Rational {
        std::iter::once(&self.left)
            .chain(self.window.iter())
            .chain(std::iter::once(&self.right))
            .map(Scalar::norm_sqr)
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn supnorm(&self) -> f64 {
        crate::scalar::rat_to_f64(&self.supnorm_sq()).sqrt()
    }

    /// `k ↦ s(k + m)`.
    pub fn shift(&self, m: i64) -> Self {
        EcSeq {
            left: self.left.clone(),
            lo: if self.is_constant() { 0 } else { self.lo - m },
            window: self.window.clone(),
            right: self.right.clone(),
        }
    }

    pub fn map(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        EcSeq::new(f(&self.left), self.lo, self.window.iter().map(&f).collect(), f(&self.right))
    }

    /// Pointwise binary operation; tails combine as tail-op-tail.
    pub fn zip_with(&self, other: &EcSeq, f: impl Fn(&Scalar, &Scalar) -> Scalar) -> Self {
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let window = (lo..=hi).map(|k| f(self.get(k), other.get(k))).collect();
        EcSeq::new(f(&self.left, &other.left), lo, window, f(&self.right, &other.right))
    }

    pub fn combine(&self, op: EcOp, other: Option<&EcSeq>) -> Self {
        match (op, other) {
            (EcOp::Add, Some(b)) => self.add(b),
            (EcOp::Mul, Some(b)) => self.mul(b),
            (EcOp::Conj, _) => self.conj(),
            (_, None) => self.clone(),
        }
    }

    pub fn add(&self, other: &EcSeq) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &EcSeq) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &EcSeq) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v)
    }

    pub fn conj(&self) -> Self {
        self.map(Scalar::conj)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|v| v * c)
    }

    /// Sum of `s(j)` over `a ≤ j ≤ b` (zero when `a > b`).
    pub fn range_sum(&self, a: i64, b: i64) -> Scalar {
        if a > b {
            return Scalar::zero();
        }
        let mut acc = Scalar::zero();
        let left_hi = b.min(self.lo - 1);
        if left_hi >= a {
            acc += &self.left.scale(&rat_int(left_hi - a + 1));
        }
        let right_lo = a.max(self.hi() + 1);
        if b >= right_lo {
            acc += &self.right.scale(&rat_int(b - right_lo + 1));
        }
        for k in a.max(self.lo)..=b.min(self.hi()) {
            acc += self.get(k);
        }
        acc
    }
}

/// Pointwise operations of the sequence algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EcOp {
    Add,
    Mul,
    Conj,
}

impl fmt::Display for EcSeq {
    /// DSL form: `seq(left=…, lo=…, values=[…], right=…)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_constant() {
            return write!(f, "const({})", self.left);
        }
        write!(f, "seq(left={}, lo={}, values=[", self.left, self.lo)?;
        for (i, v) in self.window.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "], right={})", self.right)
    }
}

impl fmt::Debug for EcSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Eventually-linear sequence `β`, stored as `β(0)` plus its increments.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElSeq {
    anchor: Scalar,
    increments: EcSeq,
}

impl ElSeq {
    pub fn new(anchor: Scalar, increments: EcSeq) -> Self {
        ElSeq { anchor, increments }
    }

    pub fn constant(c: Scalar) -> Self {
        ElSeq::new(c, EcSeq::zero())
    }

    pub fn zero() -> Self {
        ElSeq::constant(Scalar::zero())
    }

    /// `β(k) = slope·k`.
    pub fn linear(slope: Scalar) -> Self {
        ElSeq::new(Scalar::zero(), EcSeq::constant(slope))
    }

    /// `β(k) = anchor + slope_right·k` for `k ≥ 0` and `anchor + slope_left·k` for `k ≤ 0`.
    pub fn kinked(anchor: Scalar, slope_left: Scalar, slope_right: Scalar) -> Self {
        ElSeq::new(anchor, EcSeq::step(1, slope_left, slope_right))
    }

    /// `|k| + c`.
    pub fn abs_plus(c: Scalar) -> Self {
        ElSeq::kinked(c, Scalar::int(-1), Scalar::int(1))
    }

    /// Embeds an eventually-constant sequence.
    pub fn from_ec(s: &EcSeq) -> Self {
        ElSeq::new(s.get(0).clone(), s.sub(&s.shift(-1)))
    }

    /// Builds the sequence with the given values on `[lo, lo + len)` that is
    /// affine with slope `left_slope` below `lo` and `right_slope` past the window.
    pub fn from_values(lo: i64, values: &[Scalar], left_slope: Scalar, right_slope: Scalar) -> Self {
        assert!(!values.is_empty(), "from_values needs at least one value");
        let hi = lo + values.len() as i64 - 1;
        let anchor = if 0 < lo {
            &values[0] - &left_slope.scale(&rat_int(lo))
        } else if 0 > hi {
            &values[values.len() - 1] + &right_slope.scale(&rat_int(-hi))
        } else {
            values[(-lo) as usize].clone()
        };
        let diffs: Vec<Scalar> = values.windows(2).map(|w| &w[1] - &w[0]).collect();
        ElSeq::new(anchor, EcSeq::new(left_slope, lo + 1, diffs, right_slope))
    }

    pub fn anchor(&self) -> &Scalar {
        &self.anchor
    }

    pub fn increments(&self) -> &EcSeq {
        &self.increments
    }

    /// `(β₋∞, β₊∞)`: the limiting increments.
    pub fn tail_slopes(&self) -> (&Scalar, &Scalar) {
        self.increments.limits()
    }

    pub fn eval(&self, k: i64) -> Scalar {
        if k >= 0 {
            &self.anchor + &self.increments.range_sum(1, k)
        } else {
            &self.anchor - &self.increments.range_sum(k + 1, 0)
        }
    }

    pub fn eval_c64(&self, k: i64) -> Complex64 {
        self.eval(k).to_c64()
    }

    /// Values on `[lo, hi]`, computed incrementally.
    pub fn values(&self, lo: i64, hi: i64) -> Vec<Scalar> {
        let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        if lo > hi {
            return out;
        }
        let mut cur = self.eval(lo);
        out.push(cur.clone());
        for k in lo + 1..=hi {
            cur += self.increments.get(k);
            out.push(cur.clone());
        }
        out
    }

    /// Index range outside of which the sequence is exactly affine.
    pub fn affine_span(&self) -> (i64, i64) {
        let lo = (self.increments.lo() - 1).min(0);
        let hi = self.increments.hi().max(0);
        (lo, hi)
    }

    /// `k ↦ β(k + m)`.
    pub fn shift(&self, m: i64) -> Self {
        ElSeq::new(self.eval(m), self.increments.shift(m))
    }

    pub fn add(&self, other: &ElSeq) -> Self {
        ElSeq::new(&self.anchor + &other.anchor, self.increments.add(&other.increments))
    }

    pub fn sub(&self, other: &ElSeq) -> Self {
        ElSeq::new(&self.anchor - &other.anchor, self.increments.sub(&other.increments))
    }

    pub fn neg(&self) -> Self {
        ElSeq::new(-&self.anchor, self.increments.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        ElSeq::new(&self.anchor * c, self.increments.scale(c))
    }

    pub fn conj(&self) -> Self {
        ElSeq::new(self.anchor.conj(), self.increments.conj())
    }

    /// Pointwise product with an eventually-constant sequence.
    pub fn mul_ec(&self, c: &EcSeq) -> Self {
        let (blo, bhi) = self.affine_span();
        let lo = blo.min(c.lo() - 1);
        let hi = bhi.max(c.hi() + 1);
        let vals: Vec<Scalar> = self
            .values(lo, hi)
            .into_iter()
            .zip(lo..=hi)
            .map(|(b, k)| &b * c.get(k))
            .collect();
        let (sl, sr) = self.tail_slopes();
        ElSeq::from_values(lo, &vals, sl * c.left(), sr * c.right())
    }

    /// Restriction to an eventually-constant sequence, when both slopes vanish.
    pub fn to_ec(&self) -> Option<EcSeq> {
        let (sl, sr) = self.tail_slopes();
        if !sl.is_zero() || !sr.is_zero() {
            return None;
        }
        let lo = self.increments.lo() - 1;
        let hi = self.increments.hi().max(lo);
        let vals = self.values(lo, hi);
        let left = vals[0].clone();
        let right = vals[vals.len() - 1].clone();
        Some(EcSeq::new(left, lo, vals, right))
    }

    /// `k ↦ β(k + n) − β(k)`, always eventually constant.
    pub fn difference(&self, n: i64) -> EcSeq {
        self.shift(n)
            .sub(self)
            .to_ec()
            .expect("shift difference of an eventually-linear sequence has zero slopes")
    }

    pub fn is_zero(&self) -> bool {
        self.anchor.is_zero() && self.increments.is_zero()
    }
}

impl fmt::Display for ElSeq {
    /// DSL form: `el(anchor=…, inc=…)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "el(anchor={}, inc={})", self.anchor, self.increments)
    }
}

impl fmt::Debug for ElSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
