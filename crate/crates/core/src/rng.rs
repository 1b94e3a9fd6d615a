//! Seeded, splittable random streams.
//!
//! Every path draws from its own ChaCha stream selected by the path index,
//! so results do not depend on how paths are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Generator for stream `stream` under `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fill `buf` with independent standard normals.
pub fn fill_normals(rng: &mut ChaCha8Rng, buf: &mut [f64]) {
    for v in buf.iter_mut() {
        *v = StandardNormal.sample(rng);
    }
}
