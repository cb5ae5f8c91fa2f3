//! Finite sections of the component operators, smallest singular values and
//! parametrix verdicts.
//!
//! Only the compression `P D P` onto a window is used. A finite section can
//! only overestimate `‖Dₙ⁻¹‖` from below, so ceilings on `σ_min` are firm
//! evidence while growth of `σ_min` is suggestive only.

use num_complex::Complex64;
use num_traits::Zero;

use crate::coeffseq::ElSeq;
use crate::component_ops::{
    classify_mu, degenerate_eigvec, gauge_abs_beta, growth_certificate, mu_from, subdiag_obstruction, unweight_alpha,
    ComponentOp, GrowthCertificate, MuClassification, MuOption, SeqModel, DEFAULT_EXPONENTS,
};
use crate::error::{QalError, Result};
use crate::scalar::Scalar;
use crate::states_gns::{DerivationKind, GnsModel, ImplementationSpec, WeightSpec};

pub const DEFAULT_TOL: f64 = 1e-10;

/// Upper-bidiagonal compression of `Dₙ` to `[lo, hi]`: diagonal `β(k+n)`,
/// superdiagonal `−α(k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedBidiagonal {
    pub n: i64,
    pub lo: i64,
    pub diag: Vec<Complex64>,
    pub sup: Vec<Complex64>,
    /// `|α(hi)|`, the coupling to `hi + 1` dropped by the compression.
    pub dropped_coupling: f64,
}

impl TruncatedBidiagonal {
    pub fn from_parts(n: i64, lo: i64, diag: Vec<Complex64>, sup: Vec<Complex64>) -> Self {
        assert_eq!(sup.len() + 1, diag.len(), "superdiagonal must be one shorter than the diagonal");
        TruncatedBidiagonal { n, lo, diag, sup, dropped_coupling: 0.0 }
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.diag.len() as i64 - 1
    }

    /// The last column is the one whose coupling was cut.
    pub fn is_edge_column(&self, k: i64) -> bool {
        k == self.hi()
    }

    pub fn add(&self, other: &TruncatedBidiagonal) -> Self {
        assert_eq!((self.lo, self.size()), (other.lo, other.size()));
        TruncatedBidiagonal {
            n: self.n,
            lo: self.lo,
            diag: self.diag.iter().zip(&other.diag).map(|(a, b)| a + b).collect(),
            sup: self.sup.iter().zip(&other.sup).map(|(a, b)| a + b).collect(),
            dropped_coupling: self.dropped_coupling,
        }
    }

    /// Row-major dense copy.
    pub fn dense(&self) -> Vec<Vec<Complex64>> {
        let m = self.size();
        let mut out = vec![vec![Complex64::zero(); m]; m];
        for i in 0..m {
            out[i][i] = self.diag[i];
            if i + 1 < m {
                out[i][i + 1] = self.sup[i];
            }
        }
        out
    }

    /// Off-diagonal of the Golub-Kahan matrix `[[0, B], [B*, 0]]` after a
    /// perfect shuffle: `|d₀|, |e₀|, |d₁|, …, |d_{m−1}|`.
    fn golub_kahan(&self) -> Vec<f64> {
        let m = self.size();
        let mut off = Vec::with_capacity(2 * m - 1);
        for i in 0..m {
            off.push(self.diag[i].norm());
            if i + 1 < m {
                off.push(self.sup[i].norm());
            }
        }
        off
    }
}

pub fn truncate(op: &ComponentOp, n_half: i64) -> TruncatedBidiagonal {
    truncate_window(op, -n_half, n_half)
}

pub fn truncate_window(op: &ComponentOp, lo: i64, hi: i64) -> TruncatedBidiagonal {
    assert!(lo <= hi, "empty window [{lo}, {hi}]");
    TruncatedBidiagonal {
        n: op.n,
        lo,
        diag: (lo..=hi).map(|k| op.diag(k)).collect(),
        sup: (lo..hi).map(|k| op.sup(k)).collect(),
        dropped_coupling: op.alpha.eval(hi).norm(),
    }
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// zero diagonal and off-diagonal `off`.
fn sturm_count(off: &[f64], x: f64) -> usize {
    let tiny = f64::MIN_POSITIVE.sqrt();
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for b in off {
        let q_prev = if q == 0.0 { -tiny } else { q };
        q = -x - b * b / q_prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `i`-th smallest singular value (0-based) by bisection, absolute error `≤ tol`.
pub fn singular_value(t: &TruncatedBidiagonal, i: usize, tol: f64) -> f64 {
    assert!(tol > 0.0, "tolerance must be positive");
    let m = t.size();
    assert!(i < m);
    let off = t.golub_kahan();
    // Gershgorin bound for the Golub-Kahan matrix
    let mut hi = 0.0f64;
    for j in 0..=off.len() {
        let left = if j > 0 { off[j - 1] } else { 0.0 };
        let right = off.get(j).copied().unwrap_or(0.0);
        hi = hi.max(left + right);
    }
    let mut lo = 0.0f64;
    // eigenvalues are ±σ; below x > 0 there are m + #{σ < x}
    let target = m + i + 1;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&off, mid) >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn sigma_min(t: &TruncatedBidiagonal, tol: f64) -> f64 {
    singular_value(t, 0, tol)
}

pub fn sigma_max(t: &TruncatedBidiagonal, tol: f64) -> f64 {
    singular_value(t, t.size() - 1, tol)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum VerdictKind {
    CompactLikely,
    CompactRuledOut,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ParametrixVerdict {
    pub kind: VerdictKind,
    /// Which criterion produced the verdict.
    pub criterion: String,
    pub evidence: Vec<String>,
}

impl ParametrixVerdict {
    fn new(kind: VerdictKind, criterion: &str, evidence: Vec<String>) -> Self {
        ParametrixVerdict { kind, criterion: criterion.to_string(), evidence }
    }
}

/// Smallest `|λ|` of the diagonal model over `[lo, hi]` (singular values for
/// the shifted models).
pub fn diag_window_min(spec: &ImplementationSpec, lo: i64, hi: i64) -> Result<f64> {
    let m = crate::states_gns::implement_diag_models(spec)?;
    Ok((lo..=hi).map(|k| m.modulus(k)).fold(f64::INFINITY, f64::min))
}

fn is_positive_real(z: &Scalar) -> bool {
    z.is_real() && z.re > num_traits::Zero::zero()
}

/// Parametrix verdicts for the diagonal implementations, decided exactly from
/// the tail slopes of `β` and `α`.
///
/// * `τ₀`: `|β(k)| → ∞` on both sides, i.e. both slopes nonzero.
/// * `τ_±∞`: the slope on that side is nonzero.
/// * weighted invariant: `|β(k+n) − α(k)| → ∞` as `|n| + |k| → ∞`. With
///   `m = k + n` in quadrant `(σ_m, σ_k)` the values are
///   `B|m| − A|k| + O(1)` where `B = σ_m·slope_β(σ_m)` and
///   `A = σ_k·slope_α(σ_k)`; divergence needs `A, B ≠ 0` and `B·Ā` not a
///   positive real.
pub fn diagonal_criteria(spec: &ImplementationSpec) -> Result<ParametrixVerdict> {
    let (bl, br) = spec.beta.tail_slopes();
    let verdict = |ok: bool| if ok { VerdictKind::CompactLikely } else { VerdictKind::CompactRuledOut };
    match (&spec.model, spec.derivation) {
        (GnsModel::Tau0, kind) => {
            let ok = !bl.is_zero() && !br.is_zero();
            let label = match kind {
                DerivationKind::Invariant => "tau0: eigenvalues beta(k) - beta(0) + c",
                DerivationKind::Covariant => "tau0: weighted shift with singular values |beta(k)|",
            };
            let mut ev = vec![format!("slopes of beta: left {bl}, right {br}")];
            ev.push(format!("window minimum over [-50, 50]: {:.6}", diag_window_min(spec, -50, 50)?));
            if !ok {
                ev.push("a zero slope keeps the spectrum bounded along one tail".into());
            }
            Ok(ParametrixVerdict::new(verdict(ok), label, ev))
        }
        (GnsModel::TauInf(side), _) => {
            let s = side.slope(&spec.beta);
            let ok = !s.is_zero();
            let ev = vec![format!("slope of beta at {side} infinity: {s}; eigenvalues {s}*n + {}", spec.c)];
            Ok(ParametrixVerdict::new(verdict(ok), "tau_pm_inf: Fourier eigenvalues", ev))
        }
        (GnsModel::Weighted(_), DerivationKind::Invariant) => {
            let (al, ar) = spec.alpha.tail_slopes();
            let mut ok = true;
            let mut ev = Vec::new();
            for (sm, b) in [(-1i64, bl), (1, br)] {
                for (sk, a) in [(-1i64, al), (1, ar)] {
                    let bq = b.scale(&crate::scalar::rat_int(sm));
                    let aq = a.scale(&crate::scalar::rat_int(sk));
                    let bad_b = bq.is_zero();
                    let bad_a = aq.is_zero();
                    let cancel = is_positive_real(&(&bq * &aq.conj()));
                    let good = !bad_b && !bad_a && !cancel;
                    ok &= good;
                    ev.push(format!(
                        "quadrant (sign m = {sm:+}, sign k = {sk:+}): B = {bq}, A = {aq}: {}",
                        if good {
                            "diverges"
                        } else if bad_b {
                            "bounded along fixed k"
                        } else if bad_a {
                            "bounded along fixed m"
                        } else {
                            "bounded along B|m| = A|k|"
                        }
                    ));
                }
            }
            Ok(ParametrixVerdict::new(verdict(ok), "weighted invariant: eigenvalues beta(k+n) - alpha(k)", ev))
        }
        (GnsModel::Weighted(_), DerivationKind::Covariant) => Ok(ParametrixVerdict::new(
            VerdictKind::Inconclusive,
            "weighted covariant: not diagonal",
            vec!["the covariant weighted implementation is bidiagonal in each Fourier component; use nogo_probe".into()],
        )),
    }
}

/// Inputs of the no-go pipeline for the covariant weighted implementation.
#[derive(Clone, Debug, PartialEq)]
pub struct NogoSpec {
    pub beta: SeqModel,
    pub alpha: SeqModel,
    /// Weights of the GNS space; `None` means the unweighted `ℓ²` operator.
    pub weights: Option<WeightSpec>,
    pub n_min: i64,
    pub n_max: i64,
    /// Truncation half-width `N`.
    pub truncation: i64,
    /// `μ` window `[−K, K]`.
    pub mu_window: i64,
    pub exponents: Vec<f64>,
    /// Option 2: eigenvalue index `l`, eigenvector window and component range.
    pub eigen_l: i64,
    pub eigen_lo: i64,
    pub eigen_hi: i64,
    pub eigen_n_min: i64,
    pub eigen_n_max: i64,
    pub eigen_tol: f64,
    pub tol: f64,
}

impl NogoSpec {
    pub fn new(beta: SeqModel, alpha: SeqModel, weights: Option<WeightSpec>) -> Self {
        NogoSpec {
            beta,
            alpha,
            weights,
            n_min: -20,
            n_max: 20,
            truncation: 200,
            mu_window: 256,
            exponents: DEFAULT_EXPONENTS.to_vec(),
            eigen_l: 0,
            eigen_lo: -300,
            eigen_hi: 50,
            eigen_n_min: -5,
            eigen_n_max: 5,
            eigen_tol: 1e-8,
            tol: DEFAULT_TOL,
        }
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SigmaRow {
    pub n: i64,
    pub sigma_min: f64,
    pub ceiling: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EigenRow {
    pub n: i64,
    pub lambda_re: f64,
    pub lambda_im: f64,
    pub residual: f64,
    pub tail_l2: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct NogoReport {
    pub verdict: ParametrixVerdict,
    pub growth: GrowthCertificate,
    /// Largest pointwise defect of the gauge conjugation on a test vector.
    pub gauge_residual: f64,
    /// `|σ_min(D₀) − σ_min(gauged D₀)|` at the probe truncation.
    pub gauge_sigma_gap: f64,
    /// `sup|γ|` of the bounded part of `β` over the window, and the
    /// corresponding Weyl check on `D₀`.
    pub perturbation_sup: f64,
    pub perturbation_weyl_holds: bool,
    pub unweighted: bool,
    pub mu_recurrence_residual: f64,
    pub classification: MuClassification,
    pub subdiag_sup: Option<f64>,
    pub sigma_rows: Vec<SigmaRow>,
    pub eigen_rows: Vec<EigenRow>,
}

fn linear_part(s: &SeqModel) -> Option<ElSeq> {
    match s {
        SeqModel::Exact(b) | SeqModel::Perturbed { base: b, .. } => Some(b.clone()),
        _ => None,
    }
}

/// Runs the reduction chain (gauge, bounded perturbation, unweighting, `μ`
/// classification) and then the branch matching the classification.
pub fn nogo_probe(spec: &NogoSpec) -> Result<NogoReport> {
    let growth = growth_certificate(&spec.beta, spec.mu_window);
    if growth.rate_left == 0.0 || growth.rate_right == 0.0 {
        return Err(QalError::InvalidParameter(format!(
            "beta must grow on both sides, limiting rates are {} and {}",
            growth.rate_left, growth.rate_right
        )));
    }
    let k = spec
        .mu_window
        .max(spec.truncation + spec.n_max.abs().max(spec.n_min.abs()))
        .max(-spec.eigen_lo)
        .max(spec.eigen_hi + 1);
    if let Some(z) = spec.alpha.find_zero(-k, k) {
        return Err(QalError::ZeroAlpha { k: z });
    }
    let n_trunc = spec.truncation;
    let tol = spec.tol;

    // gauge to a positive diagonal
    let op0 = ComponentOp { n: 0, beta: spec.beta.clone(), alpha: spec.alpha.clone() };
    let (phases, gauged) = gauge_abs_beta(&op0, -n_trunc, n_trunc)?;
    let probe: Vec<Complex64> =
        (0..=2 * n_trunc).map(|i| Complex64::new(1.0 / (1.0 + i as f64), ((i % 7) as f64 - 3.0) / 7.0)).collect();
    let gauge_residual = crate::component_ops::gauge_residual(&op0, &gauged, &phases, -n_trunc, &probe);
    let s_orig = sigma_min(&truncate(&op0, n_trunc), tol);
    let s_gauged = sigma_min(&truncate(&gauged, n_trunc), tol);
    let beta_pos = if (-k..=k).all(|j| {
        let v = spec.beta.eval(j);
        v.im == 0.0 && v.re > 0.0
    }) {
        spec.beta.clone()
    } else {
        gauged.beta.clone()
    };

    // bounded perturbation: drop the bounded part of β and compare
    let (perturbation_sup, perturbation_weyl_holds) = match linear_part(&spec.beta) {
        Some(base) if !matches!(spec.beta, SeqModel::Exact(_)) => {
            let base = SeqModel::Exact(base);
            let sup = (-k..=k).map(|j| (spec.beta.eval(j) - base.eval(j)).norm()).fold(0.0, f64::max);
            let t = truncate(&op0, n_trunc);
            let t_base = truncate(&ComponentOp { beta: base, ..op0.clone() }, n_trunc);
            let gap = (sigma_min(&t, tol) - sigma_min(&t_base, tol)).abs();
            (sup, gap <= sup + 2.0 * tol)
        }
        _ => (0.0, true),
    };

    let alpha_tilde = match &spec.weights {
        Some(w) => unweight_alpha(&spec.alpha, w)?,
        None => spec.alpha.clone(),
    };
    let mu = mu_from(&alpha_tilde, &beta_pos, -k, k)?;
    let mu_recurrence_residual = mu.recurrence_residual(&alpha_tilde, &beta_pos);
    let classification = classify_mu(&mu, &spec.exponents);
    let base = ComponentOp { n: 0, beta: beta_pos, alpha: alpha_tilde };

    let mut sigma_rows = Vec::new();
    let mut eigen_rows = Vec::new();
    let mut subdiag_sup = None;
    let verdict = match classification.option {
        MuOption::Option1 => {
            let table = subdiag_obstruction(&base, &mu, -k + 1, k)?;
            subdiag_sup = Some(table.sup);
            let ceiling = table.sigma_min_ceiling();
            for n in spec.n_min..=spec.n_max {
                let s = sigma_min(&truncate(&base.with_n(n), n_trunc), tol);
                sigma_rows.push(SigmaRow { n, sigma_min: s, ceiling, holds: s <= ceiling + tol });
            }
            let all = sigma_rows.iter().all(|r| r.holds);
            let ev = vec![
                format!("sup |Delta(k,k-1)| = {:.6} at k = {}", table.sup, table.argsup),
                format!(
                    "sigma_min(D_n) <= {:.6} for all {} <= n <= {} at N = {}: {}",
                    ceiling,
                    spec.n_min,
                    spec.n_max,
                    n_trunc,
                    if all { "yes" } else { "no" }
                ),
                "inverse norms of the components stay bounded below, so they cannot tend to zero".into(),
            ];
            ParametrixVerdict::new(
                if all { VerdictKind::CompactRuledOut } else { VerdictKind::Inconclusive },
                "rapid growth right, rapid decay left: sub-diagonal obstruction",
                ev,
            )
        }
        MuOption::Option2 => {
            for n in spec.eigen_n_min..=spec.eigen_n_max {
                let cert = degenerate_eigvec(&base.with_n(n), &mu, spec.eigen_l, spec.eigen_lo, spec.eigen_hi)?;
                eigen_rows.push(EigenRow {
                    n,
                    lambda_re: cert.lambda.re,
                    lambda_im: cert.lambda.im,
                    residual: cert.residual,
                    tail_l2: cert.tail_l2,
                    holds: cert.residual < spec.eigen_tol && cert.tail_l2.is_finite(),
                });
            }
            let count = eigen_rows.iter().filter(|r| r.holds).count();
            let all = count == eigen_rows.len();
            let lambda = base.beta.eval(spec.eigen_l);
            let ev = vec![
                format!(
                    "lambda = beta({}) = {:.6} eigen-residual < {:e} for {} components",
                    spec.eigen_l, lambda.re, spec.eigen_tol, count
                ),
                "a shared eigenvalue across components has infinite multiplicity".into(),
            ];
            ParametrixVerdict::new(
                if all { VerdictKind::CompactRuledOut } else { VerdictKind::Inconclusive },
                "rapid decay right, rapid growth left: degenerate eigenvalue",
                ev,
            )
        }
        MuOption::Neither => ParametrixVerdict::new(
            VerdictKind::Inconclusive,
            "mu is neither rapidly growing nor rapidly decaying on opposite sides",
            vec![format!(
                "exponents at the window edge: right {:.3}, left {:.3}; compact parametrices would force one of the two rapid patterns",
                classification.exponent_right, classification.exponent_left
            )],
        ),
    };
    Ok(NogoReport {
        verdict,
        growth,
        gauge_residual,
        gauge_sigma_gap: (s_orig - s_gauged).abs(),
        perturbation_sup,
        perturbation_weyl_holds,
        unweighted: spec.weights.is_some(),
        mu_recurrence_residual,
        classification,
        subdiag_sup,
        sigma_rows,
        eigen_rows,
    })
}

#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct SweepRow {
    pub n: i64,
    pub truncation: i64,
    pub sigma_min: f64,
}

/// `σ_min(truncate(Dₙ, N))` over the given components and half-widths,
/// ordered by `(n, N)`.
pub fn sigma_sweep(op: &ComponentOp, ns: &[i64], widths: &[i64], tol: f64) -> Vec<SweepRow> {
    let mut rows = Vec::with_capacity(ns.len() * widths.len());
    std::thread::scope(|scope| {
        let handles: Vec<_> = ns
            .iter()
            .map(|&n| {
                scope.spawn(move || {
                    let opn = op.with_n(n);
                    widths
                        .iter()
                        .map(|&w| SweepRow { n, truncation: w, sigma_min: sigma_min(&truncate(&opn, w), tol) })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            rows.extend(h.join().expect("sweep worker panicked"));
        }
    });
    rows.sort_by_key(|r| (r.n, r.truncation));
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::component_ops::PerturbationKind;
    use crate::scalar::ratio;
    use nalgebra::DMatrix;

    fn s(v: i64) -> Scalar {
        Scalar::int(v)
    }

    fn abs1() -> ElSeq {
        ElSeq::abs_plus(s(1))
    }

    fn svd_min(t: &TruncatedBidiagonal) -> f64 {
        let m = t.size();
        let dense = t.dense();
        let mat = DMatrix::from_fn(m, m, |i, j| dense[i][j]);
        mat.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn truncate_examples() {
        let op = ComponentOp::new(0, abs1(), ElSeq::zero());
        let t = truncate(&op, 2);
        let d: Vec<f64> = t.diag.iter().map(|z| z.re).collect();
        assert_eq!(d, vec![3.0, 2.0, 1.0, 2.0, 3.0]);
        assert!(t.sup.iter().all(|z| z.norm() == 0.0));
        let t1 = truncate(&op.with_n(1), 2);
        assert_eq!(t1.diag[0].re, 2.0);
        assert!(t.is_edge_column(2));
    }

    #[test]
    fn sigma_examples() {
        let op = ComponentOp::new(0, abs1(), ElSeq::zero());
        assert!((sigma_min(&truncate(&op, 2), DEFAULT_TOL) - 1.0).abs() <= DEFAULT_TOL);
        let id = ComponentOp::new(0, ElSeq::constant(s(1)), ElSeq::zero());
        assert!((sigma_min(&truncate(&id, 10), DEFAULT_TOL) - 1.0).abs() <= DEFAULT_TOL);
        assert!((sigma_max(&truncate(&op, 2), DEFAULT_TOL) - 3.0).abs() <= DEFAULT_TOL);
    }

    #[test]
    fn sturm_matches_svd_oracle() {
        let beta = SeqModel::Perturbed { base: abs1(), kind: PerturbationKind::LogDamped, amplitude: Scalar::i() };
        let alpha = SeqModel::Exact(ElSeq::kinked(s(2), Scalar::frac(-1, 2), s(3)));
        for n in [-3, 0, 2] {
            let op = ComponentOp { n, beta: beta.clone(), alpha: alpha.clone() };
            for w in [3, 10, 25] {
                let t = truncate(&op, w);
                let a = sigma_min(&t, 1e-12);
                let b = svd_min(&t);
                assert!((a - b).abs() < 1e-9, "n={n} N={w}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn interlacing_in_window_size() {
        let ops = [
            ComponentOp::new(0, abs1(), abs1().scale(&s(2))),
            ComponentOp::new(3, abs1(), abs1().scale(&Scalar::frac(1, 2))),
            ComponentOp::new(-2, abs1(), ElSeq::constant(s(1))),
            ComponentOp::new(0, abs1(), abs1()),
        ];
        for op in &ops {
            let mut prev = f64::INFINITY;
            for w in [5, 10, 20, 40, 80] {
                let v = sigma_min(&truncate(op, w), 1e-12);
                assert!(v <= prev + 1e-11, "{op:?} N={w}");
                prev = v;
            }
        }
    }

    #[test]
    fn weyl_and_gauge() {
        let op = ComponentOp::new(1, abs1().neg(), abs1().scale(&Scalar::new(ratio(1, 2), ratio(1, 3))));
        let t = truncate(&op, 40);
        let pert = ComponentOp::new(
            1,
            SeqModel::Perturbed { base: ElSeq::zero(), kind: PerturbationKind::Decaying, amplitude: s(1) },
            SeqModel::Perturbed { base: ElSeq::zero(), kind: PerturbationKind::Constant, amplitude: Scalar::frac(1, 4) },
        );
        let e = truncate(&pert, 40);
        let gap = (sigma_min(&t, 1e-12) - sigma_min(&t.add(&e), 1e-12)).abs();
        assert!(gap <= sigma_max(&e, 1e-12) + 1e-10);
        let (_, g) = gauge_abs_beta(&op, -40, 40).unwrap();
        let diff = (sigma_min(&t, 1e-12) - sigma_min(&truncate(&g, 40), 1e-12)).abs();
        assert!(diff < 1e-10);
    }

    #[test]
    fn option1_ceiling_and_contrast() {
        let op = ComponentOp::new(0, abs1(), abs1().scale(&s(2)));
        for n in [-20, -7, 0, 9, 20] {
            assert!(sigma_min(&truncate(&op.with_n(n), 200), DEFAULT_TOL) <= 2.0 + 1e-8);
        }
        let contrast = ComponentOp::new(0, abs1(), ElSeq::zero());
        let centered = sigma_min(&truncate(&contrast, 200), DEFAULT_TOL);
        let shifted = sigma_min(&truncate_window(&contrast, 20, 220), DEFAULT_TOL);
        assert!(shifted >= 10.0 * centered);
    }

    fn spec(model: GnsModel, derivation: DerivationKind, beta: ElSeq, alpha: ElSeq) -> ImplementationSpec {
        ImplementationSpec { derivation, model, beta, alpha, c: Scalar::zero() }
    }

    #[test]
    fn diagonal_criteria_examples() {
        let abs = ElSeq::abs_plus(s(0));
        let v = diagonal_criteria(&spec(GnsModel::Tau0, DerivationKind::Invariant, abs.clone(), ElSeq::zero())).unwrap();
        assert_eq!(v.kind, VerdictKind::CompactLikely);
        let bounded = ElSeq::from_values(-1, &[s(1), s(0), s(2)], s(0), s(0));
        let v = diagonal_criteria(&spec(GnsModel::Tau0, DerivationKind::Invariant, bounded, ElSeq::zero())).unwrap();
        assert_eq!(v.kind, VerdictKind::CompactRuledOut);
        let half = ElSeq::kinked(s(0), s(-2), s(0));
        let plus = GnsModel::TauInf(crate::states_gns::Side::Plus);
        let v = diagonal_criteria(&spec(plus.clone(), DerivationKind::Invariant, half.clone(), ElSeq::zero())).unwrap();
        assert_eq!(v.kind, VerdictKind::CompactRuledOut);
        let minus = GnsModel::TauInf(crate::states_gns::Side::Minus);
        let v = diagonal_criteria(&spec(minus, DerivationKind::Covariant, half, ElSeq::zero())).unwrap();
        assert_eq!(v.kind, VerdictKind::CompactLikely);
        let w = GnsModel::Weighted(WeightSpec::geometric(ratio(1, 2)).unwrap());
        let lin = ElSeq::linear(s(1));
        let v = diagonal_criteria(&spec(w.clone(), DerivationKind::Invariant, lin.clone(), lin.scale(&Scalar::i())))
            .unwrap();
        assert_eq!(v.kind, VerdictKind::CompactLikely);
        let v = diagonal_criteria(&spec(w.clone(), DerivationKind::Invariant, abs, ElSeq::zero())).unwrap();
        assert_eq!(v.kind, VerdictKind::CompactRuledOut);
        let v = diagonal_criteria(&spec(w.clone(), DerivationKind::Invariant, lin.clone(), lin.neg())).unwrap();
        assert_eq!(v.kind, VerdictKind::CompactRuledOut);
    }

    #[test]
    fn shifted_windows_grow_for_positive_case() {
        let sp = spec(GnsModel::Tau0, DerivationKind::Invariant, ElSeq::abs_plus(s(0)), ElSeq::zero());
        let mins: Vec<f64> = [0, 10, 100, 1000].iter().map(|&a| diag_window_min(&sp, a, a + 50).unwrap()).collect();
        assert_eq!(mins, vec![0.0, 10.0, 100.0, 1000.0]);
    }

    #[test]
    fn nogo_branches() {
        let w = WeightSpec::geometric(ratio(1, 4)).unwrap();
        let weighted_alpha = abs1().scale(&s(2)).mul_ec(&crate::coeffseq::EcSeq::step(0, s(2), Scalar::frac(1, 2)));
        let mut sp = NogoSpec::new(SeqModel::Exact(abs1()), SeqModel::Exact(weighted_alpha), Some(w));
        let rep = nogo_probe(&sp).unwrap();
        assert_eq!(rep.classification.option, MuOption::Option1);
        assert_eq!(rep.verdict.kind, VerdictKind::CompactRuledOut);
        assert_eq!(rep.sigma_rows.len(), 41);
        assert!((rep.subdiag_sup.unwrap() - 0.5).abs() < 1e-12);

        sp.weights = None;
        sp.alpha = SeqModel::Exact(abs1().scale(&Scalar::frac(1, 2)));
        let rep = nogo_probe(&sp).unwrap();
        assert_eq!(rep.classification.option, MuOption::Option2);
        assert_eq!(rep.verdict.kind, VerdictKind::CompactRuledOut);
        assert_eq!(rep.eigen_rows.len(), 11);

        sp.alpha = SeqModel::PolyRatio { base: Box::new(SeqModel::Exact(abs1())), power: 3 };
        let rep = nogo_probe(&sp).unwrap();
        assert_eq!(rep.classification.option, MuOption::Neither);
        assert_eq!(rep.verdict.kind, VerdictKind::Inconclusive);
    }
}
