//! Counter-based sampling keyed by `(seed, stream, index)`.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::algebra::{AlgElement, AlgebraTag, Scalar, Variant};

pub type Rng = ChaCha8Rng;

/// Words reserved per sample index inside one stream.
const WORDS_PER_INDEX: u128 = 1 << 36;

/// FNV-1a, used to turn suite names into stream ids.
pub fn stream_id(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Generator for sample `index` of stream `stream` under `seed`. Results do not
/// depend on the order in which samples are drawn.
pub fn keyed(seed: u64, stream: &str, index: u64) -> Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream_id(stream));
    r.set_word_pos(index as u128 * WORDS_PER_INDEX);
    r
}

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn uniform(rng: &mut Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo..hi)
}

/// Uniform point on the unit circle of C.
pub fn unit_scalar(rng: &mut Rng) -> Scalar {
    let t = uniform(rng, 0.0, std::f64::consts::TAU);
    Scalar::new(t.cos(), t.sin())
}

/// Gaussian vector in `Pu_F(tag)`; uniform in direction.
pub fn gaussian_pure(rng: &mut Rng, variant: Variant, tag: AlgebraTag) -> AlgElement {
    let n = variant.pure_dim(tag);
    let z: Vec<Scalar> = (0..n)
        .map(|_| match variant {
            Variant::RH => Scalar::new(normal(rng), 0.0),
            Variant::CO => Scalar::new(normal(rng), normal(rng)),
        })
        .collect();
    variant.from_coords(&z)
}

/// Uniform unit vector in `Pu_F(tag)`.
pub fn unit_pure(rng: &mut Rng, variant: Variant, tag: AlgebraTag) -> AlgElement {
    loop {
        let x = gaussian_pure(rng, variant, tag);
        if x.norm() > 1e-3 {
            return x.scale_real(1.0 / x.norm());
        }
    }
}

/// Gaussian element of `tag` with all coordinates populated.
pub fn gaussian_element(rng: &mut Rng, tag: AlgebraTag) -> AlgElement {
    let mut c = [0.0; 8];
    for x in c.iter_mut().take(tag.dim()) {
        *x = normal(rng);
    }
    AlgElement::from_coords(c)
}

/// Element of `tag` with unit norm.
pub fn unit_element(rng: &mut Rng, tag: AlgebraTag) -> AlgElement {
    loop {
        let x = gaussian_element(rng, tag);
        if x.norm() > 1e-3 {
            return x.scale_real(1.0 / x.norm());
        }
    }
}
