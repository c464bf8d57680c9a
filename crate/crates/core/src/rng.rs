//! Reproducible random streams and simplex samplers.
//!
//! Every randomized routine derives its generator from a `(seed, index)`
//! pair: ChaCha8 keyed by the seed, with the index selecting the 64-bit
//! stream. ChaCha is counter-based, so stream `i` is the same no matter how
//! work is partitioned across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, Exp1};

use crate::distribution::Distribution;

/// Generator for stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Cheap factory for many streams under one seed.
#[derive(Clone)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng
    }
}

/// Dirichlet(1, …, 1) sample, i.e. a uniform point of the simplex.
pub fn dirichlet_uniform<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Distribution {
    loop {
        let w: Vec<f64> = (0..m).map(|_| Exp1.sample(rng)).collect();
        if w.iter().sum::<f64>() > 0.0 {
            return Distribution::from_weights_unchecked(w);
        }
    }
}

/// Dirichlet(1, …, 1) on a random support of size 1..=m, zero elsewhere.
pub fn sparse_dirichlet<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Distribution {
    let support = rng.random_range(1..=m);
    let chosen = rand::seq::index::sample(rng, m, support);
    let mut w = vec![0.0; m];
    for i in chosen.iter() {
        w[i] = Exp1.sample(rng);
    }
    if w.iter().sum::<f64>() <= 0.0 {
        w[chosen.index(0)] = 1.0;
    }
    Distribution::from_weights_unchecked(w)
}

/// Dirichlet sample with every coordinate strictly positive.
pub fn interior_dirichlet<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Distribution {
    loop {
        let p = dirichlet_uniform(m, rng);
        if p.is_interior() {
            return p;
        }
    }
}
