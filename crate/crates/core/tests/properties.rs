use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qal_core::algebra::{rho, rho_exact};
use qal_core::sample::Sampler;
use qal_core::scalar::ratio;
use qal_core::spectral_lab::{sigma_max, sigma_min, singular_value, TruncatedBidiagonal};
use qal_core::states_gns::{gns_norm_w_sq, state_eval};
use qal_core::{CovariantDerivation, InvariantDerivation, RootOfUnity, Scalar, StateSpec, WeightSpec};

const TOL: f64 = 1e-10;

fn bidiagonal(entries: &[(f64, f64)]) -> TruncatedBidiagonal {
    let c: Vec<Complex64> = entries.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    let m = c.len().div_ceil(2);
    TruncatedBidiagonal::from_parts(0, 0, c[..m].to_vec(), c[m..2 * m - 1].to_vec())
}

fn dense_svd(t: &TruncatedBidiagonal) -> Vec<f64> {
    let m = t.size();
    let d = t.dense();
    let mut sv: Vec<f64> = DMatrix::from_fn(m, m, |i, j| d[i][j]).singular_values().iter().copied().collect();
    sv.sort_by(f64::total_cmp);
    sv
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_is_associative_and_star_reverses(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let (a, b, c) = (s.element(), s.element(), s.element());
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b).star(), b.star().mul(&a.star()));
        prop_assert_eq!(a.star().star(), a);
    }

    #[test]
    fn derivations_satisfy_leibniz(seed in any::<u64>()) {
        let mut s = Sampler::new(seed);
        let (a, b) = s.pair();
        let beta = s.el_seq();
        let d = InvariantDerivation::new(beta.clone());
        prop_assert_eq!(d.apply(&a.mul(&b)), a.mul(&d.apply(&b)).add(&d.apply(&a).mul(&b)));
        let dc = CovariantDerivation::new(beta);
        prop_assert_eq!(dc.apply(&a.mul(&b)), a.mul(&dc.apply(&b)).add(&dc.apply(&a).mul(&b)));
    }

    #[test]
    fn invariant_derivations_commute_with_rotations(seed in any::<u64>(), p in 0i64..12) {
        let mut s = Sampler::new(seed);
        let a = s.element();
        let d = InvariantDerivation::new(s.el_seq());
        let z = RootOfUnity::new(p, 12).unwrap();
        prop_assert_eq!(d.apply_phased(&rho(&a, z)).unwrap(), rho(&d.apply(&a), z));
        let i = RootOfUnity::new(p % 4, 4).unwrap();
        prop_assert_eq!(d.apply(&rho_exact(&a, i).unwrap()), rho_exact(&d.apply(&a), i).unwrap());
    }

    #[test]
    fn gns_norm_matches_state(seed in any::<u64>(), q in prop_oneof![Just((1, 2)), Just((1, 4)), Just((2, 3))]) {
        let mut s = Sampler::new(seed);
        let a = s.element();
        let w = WeightSpec::geometric(ratio(q.0, q.1)).unwrap();
        let norm = gns_norm_w_sq(&a, &w);
        let via_state = state_eval(&StateSpec::tau_w(w), &a.star().mul(&a));
        prop_assert_eq!(via_state, Scalar::real(norm));
    }

    #[test]
    fn bisection_agrees_with_dense_svd(entries in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..40)) {
        let t = bidiagonal(&entries);
        let sv = dense_svd(&t);
        for (i, want) in sv.iter().enumerate() {
            let got = singular_value(&t, i, TOL);
            prop_assert!((got - want).abs() <= 1e-8, "sigma_{} = {} vs {}", i, got, want);
        }
    }

    #[test]
    fn sigma_min_obeys_weyl(
        base in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..30),
        scale in 1e-6f64..1.0,
        seed in any::<u64>(),
    ) {
        let t = bidiagonal(&base);
        let m = t.size();
        let mut s = Sampler::new(seed);
        let mut noise = |_| {
            use rand::Rng;
            Complex64::new(s.rng().random_range(-1.0..1.0), s.rng().random_range(-1.0..1.0)) * scale
        };
        let e = TruncatedBidiagonal::from_parts(0, 0, (0..m).map(&mut noise).collect(), (1..m).map(&mut noise).collect());
        let gap = (sigma_min(&t.add(&e), TOL) - sigma_min(&t, TOL)).abs();
        prop_assert!(gap <= sigma_max(&e, TOL) + 2.0 * TOL);
    }
}
