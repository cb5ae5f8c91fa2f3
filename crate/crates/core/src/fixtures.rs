//! Reference coefficient families shared by tests, the command runner and
//! the benchmarks.

use crate::coeffseq::{EcSeq, ElSeq};
use crate::component_ops::{ComponentOp, SeqModel};
use crate::scalar::{ratio, Scalar};
use crate::spectral_lab::NogoSpec;
use crate::states_gns::{DerivationKind, GnsModel, ImplementationSpec, Side, WeightSpec};

/// `β(k) = |k| + 1`.
pub fn beta_abs1() -> ElSeq {
    ElSeq::abs_plus(Scalar::one())
}

/// Weighted data over `q = 1/4` whose unweighted `α̃ = 2β` gives `μ(k) = 2^k`.
pub fn option1_nogo() -> NogoSpec {
    let w = WeightSpec::geometric(ratio(1, 4)).expect("q = 1/4 is valid");
    // α = 2β·√(w(k+1)/w(k)): 2 for k < 0, 1/2 for k ≥ 0
    let alpha = beta_abs1()
        .scale(&Scalar::int(2))
        .mul_ec(&EcSeq::step(0, Scalar::int(2), Scalar::frac(1, 2)));
    NogoSpec::new(SeqModel::Exact(beta_abs1()), SeqModel::Exact(alpha), Some(w))
}

/// Unweighted `α = β/2`, so `μ(k) = 2^{−k}`.
pub fn option2_nogo() -> NogoSpec {
    NogoSpec::new(SeqModel::Exact(beta_abs1()), SeqModel::Exact(beta_abs1().scale(&Scalar::frac(1, 2))), None)
}

/// `μ(k) = (1 + |k|)³`: polynomial on both sides.
pub fn neither_nogo() -> NogoSpec {
    let alpha = SeqModel::PolyRatio { base: Box::new(SeqModel::Exact(beta_abs1())), power: 3 };
    NogoSpec::new(SeqModel::Exact(beta_abs1()), alpha, None)
}

/// Unweighted Option-1 component `D₀` with `α = 2β`.
pub fn option1_component() -> ComponentOp {
    ComponentOp::new(0, beta_abs1(), beta_abs1().scale(&Scalar::int(2)))
}

/// Diagonal contrast case `β = |k| + 1`, `α = 0`.
pub fn contrast_component() -> ComponentOp {
    ComponentOp::new(0, beta_abs1(), ElSeq::zero())
}

/// One positive and one negative case for each diagonal criterion, with the
/// verdict the slope conditions predict (`true` = compact parametrices).
pub fn diagonal_cases() -> Vec<(&'static str, ImplementationSpec, bool)> {
    let z = Scalar::zero();
    let w = GnsModel::Weighted(WeightSpec::geometric(ratio(1, 2)).expect("q = 1/2 is valid"));
    let spec = |model: GnsModel, beta: ElSeq, alpha: ElSeq| ImplementationSpec {
        derivation: DerivationKind::Invariant,
        model,
        beta,
        alpha,
        c: z.clone(),
    };
    let lin = ElSeq::linear(Scalar::one());
    vec![
        ("tau0, beta = |k|", spec(GnsModel::Tau0, ElSeq::abs_plus(z.clone()), ElSeq::zero()), true),
        (
            "tau0, beta bounded",
            spec(GnsModel::Tau0, ElSeq::from_values(-1, &[Scalar::one(), z.clone(), Scalar::int(2)], z.clone(), z.clone()), ElSeq::zero()),
            false,
        ),
        (
            "tau_plus, slope 2",
            spec(GnsModel::TauInf(Side::Plus), ElSeq::kinked(z.clone(), z.clone(), Scalar::int(2)), ElSeq::zero()),
            true,
        ),
        (
            "tau_plus, slope 0 (unbounded on the left)",
            spec(GnsModel::TauInf(Side::Plus), ElSeq::kinked(z.clone(), Scalar::int(-2), z.clone()), ElSeq::zero()),
            false,
        ),
        ("weighted, beta = k, alpha = ik", spec(w.clone(), lin.clone(), lin.scale(&Scalar::i())), true),
        ("weighted, beta = |k|, alpha = 0", spec(w, ElSeq::abs_plus(z.clone()), ElSeq::zero()), false),
    ]
}
