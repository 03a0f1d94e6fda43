//! Independent random streams derived from one user seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Consumer of a derived stream. Each purpose gets its own ChaCha stream, so
/// drawing more numbers for one purpose never shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Generate = 1,
    Split = 2,
    Init = 3,
    DropConnect = 4,
    Negatives = 5,
    Analysis = 6,
}

pub fn stream(seed: u64, purpose: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(purpose as u64);
    rng
}
