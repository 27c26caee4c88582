//! Seeded random test data. A seed fully determines every sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{BasisLabel, Component, Takiff, TakiffElement};
use crate::scalar::{rational, Rational, Scalar};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Which subspace of `g_l` a random element is drawn from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    All,
    /// `b_l`: Cartan and positive root vectors.
    Borel,
    /// `n_l`: positive root vectors.
    Nilradical,
    /// `b̄_l`: Cartan and negative root vectors.
    OppositeBorel,
}

impl Support {
    pub fn admits(&self, label: BasisLabel) -> bool {
        match self {
            Support::All => true,
            Support::Borel => !label.is_negative(),
            Support::Nilradical => label.is_positive(),
            Support::OppositeBorel => !label.is_positive(),
        }
    }
}

/// Small rational `p/q` with `|p| ≤ max_num`, `1 ≤ q ≤ max_den`.
pub fn random_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Rational {
    rational(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

pub fn random_element<S: Scalar, R: Rng>(
    rng: &mut R,
    alg: &Takiff,
    support: Support,
    mut sample: impl FnMut(&mut R) -> S,
) -> TakiffElement<S> {
    let mut x = alg.zero();
    for Component { label, level } in alg.components() {
        if support.admits(label) {
            x.set(label, level, sample(rng));
        }
    }
    x
}

pub fn random_exact(rng: &mut impl Rng, alg: &Takiff, support: Support) -> TakiffElement<Rational> {
    random_element(rng, alg, support, |r| random_rational(r, 3, 3))
}

pub fn random_float(
    rng: &mut impl Rng,
    alg: &Takiff,
    support: Support,
    scale: f64,
) -> TakiffElement<f64> {
    random_element(rng, alg, support, |r| scale * r.gen_range(-1.0..1.0))
}
