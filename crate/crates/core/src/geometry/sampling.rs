use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::PointCloud;
use crate::error::{invalid, Result};

/// The generator every seeded routine in the crate draws from.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Draws `count` i.i.d. uniform points from the `n`-ball of radius `radius`.
///
/// Each point is a standard Gaussian direction rescaled to radius
/// `radius * U^{1/n}`; rejection sampling is hopeless at `n = 10` and beyond.
pub fn sample_uniform_ball(n: usize, radius: f64, count: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 || count == 0 {
        return Err(invalid("dimension and sample count must be positive"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let mut rng = seeded_rng(seed);
    let mut data = Vec::with_capacity(n * count);
    let mut dir = vec![0.0; n];
    let inv_n = 1.0 / n as f64;
    for _ in 0..count {
        let len = loop {
            for d in dir.iter_mut() {
                *d = rng.sample(StandardNormal);
            }
            let len = super::norm(&dir);
            if len > 0.0 {
                break len;
            }
        };
        let u: f64 = rng.random();
        let scale = radius * u.powf(inv_n) / len;
        data.extend(dir.iter().map(|d| d * scale));
    }
    PointCloud::from_flat(n, data)
}
