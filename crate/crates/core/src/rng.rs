//! Deterministic random streams. Every parallel chunk draws from its own
//! ChaCha substream keyed by `(seed, stream)`, so results do not depend on
//! the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type StreamRng = ChaCha8Rng;

/// Chunk size used by every chunked Monte-Carlo loop.
pub const CHUNK: usize = 4096;

pub fn substream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Standard Gaussian vector normalized to the unit sphere.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let n = crate::linalg::norm(&g);
        if n > 1e-12 {
            return g.into_iter().map(|x| x / n).collect();
        }
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

/// Splits `total` into `(chunk_index, len)` pieces of at most [`CHUNK`].
pub fn chunks(total: usize) -> Vec<(u64, usize)> {
    (0..total.div_ceil(CHUNK))
        .map(|c| (c as u64, CHUNK.min(total - c * CHUNK)))
        .collect()
}

/// Running mean and second central moment, mergeable across chunks.
#[derive(Debug, Clone, Copy, Default)]
pub struct Moments {
    pub n: usize,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(self, other: Moments) -> Moments {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        Moments {
            n,
            mean: self.mean + delta * other.n as f64 / n as f64,
            m2: self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64,
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        (self.m2 / (self.n - 1) as f64 / self.n as f64).sqrt()
    }
}

/// Moments of `f` over `samples` draws; chunk `c` uses `substream(seed, c)`.
pub fn parallel_moments<F>(samples: usize, seed: u64, f: F) -> crate::Result<Moments>
where
    F: Fn(&mut StreamRng) -> crate::Result<f64> + Sync,
{
    use rayon::prelude::*;
    let parts: Vec<crate::Result<Moments>> = chunks(samples)
        .into_par_iter()
        .map(|(c, len)| {
            let mut rng = substream(seed, c);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(f(&mut rng)?);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        total = total.merge(p?);
    }
    Ok(total)
}
