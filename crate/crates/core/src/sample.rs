//! Seeded random elements for the property suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::AlgebraElement;
use crate::coeffseq::{EcSeq, ElSeq};
use crate::scalar::{ratio, rat_int, Scalar};

/// Default seed of the randomized suites.
pub const DEFAULT_SEED: u64 = 0x05ee_da11;

/// Shape limits for sampled elements.
#[derive(Clone, Copy, Debug)]
pub struct SampleShape {
    /// Degrees are drawn from `[-max_degree, max_degree]`.
    pub max_degree: i64,
    /// Coefficient windows start in `[-window_reach, window_reach]`.
    pub window_reach: i64,
    pub max_window_len: usize,
    pub max_terms: usize,
    /// Allow nonzero imaginary parts.
    pub complex: bool,
}

impl Default for SampleShape {
    fn default() -> Self {
        SampleShape { max_degree: 3, window_reach: 4, max_window_len: 4, max_terms: 3, complex: true }
    }
}

pub struct Sampler {
    rng: ChaCha8Rng,
    shape: SampleShape,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler::with_shape(seed, SampleShape::default())
    }

    pub fn with_shape(seed: u64, shape: SampleShape) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed), shape }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// Small rational (or Gaussian rational) with denominators up to 3.
    pub fn scalar(&mut self) -> Scalar {
        let re = ratio(self.rng.random_range(-3..=3), self.rng.random_range(1..=3));
        let im = if self.shape.complex && self.rng.random_bool(0.3) {
            rat_int(self.rng.random_range(-2..=2))
        } else {
            rat_int(0)
        };
        Scalar::new(re, im)
    }

    pub fn ec_seq(&mut self) -> EcSeq {
        let reach = self.shape.window_reach;
        let lo = self.rng.random_range(-reach..=reach);
        let len = self.rng.random_range(0..=self.shape.max_window_len);
        let window = (0..len).map(|_| self.scalar()).collect();
        let left = self.scalar();
        let right = if self.rng.random_bool(0.3) { left.clone() } else { self.scalar() };
        EcSeq::new(left, lo, window, right)
    }

    pub fn el_seq(&mut self) -> ElSeq {
        let anchor = self.scalar();
        let inc = self.ec_seq();
        ElSeq::new(anchor, inc)
    }

    pub fn element(&mut self) -> AlgebraElement {
        let d = self.shape.max_degree;
        let n_terms = self.rng.random_range(1..=self.shape.max_terms);
        AlgebraElement::from_terms(
            (0..n_terms)
                .map(|_| (self.rng.random_range(-d..=d), self.ec_seq()))
                .collect::<Vec<_>>(),
        )
    }

    pub fn pair(&mut self) -> (AlgebraElement, AlgebraElement) {
        (self.element(), self.element())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampler_is_deterministic() {
        let a: Vec<_> = (0..5).map({
            let mut s = Sampler::new(7);
            move |_| s.element()
        }).collect();
        let b: Vec<_> = (0..5).map({
            let mut s = Sampler::new(7);
            move |_| s.element()
        }).collect();
        assert_eq!(a, b);
        assert!(a.iter().all(|x| x.max_shift() <= 3));
    }
}
