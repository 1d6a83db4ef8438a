//! Hierarchical seeds. Every shot, trajectory and sweep point draws from
//! its own stream derived from the master seed and its position, so
//! results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream(u64);

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedStream {
    pub fn new(master: u64) -> Self {
        SeedStream(master)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    /// Independent sub-stream for position `index`.
    pub fn child(self, index: u64) -> SeedStream {
        SeedStream(splitmix64(splitmix64(self.0) ^ index))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::collections::HashSet;

    #[test]
    fn children_are_distinct_and_stable() {
        let root = SeedStream::new(42);
        let kids: HashSet<u64> = (0..10_000).map(|i| root.child(i).value()).collect();
        assert_eq!(kids.len(), 10_000);
        assert_eq!(root.child(3), SeedStream::new(42).child(3));
        assert_ne!(root.child(1).child(2), root.child(2).child(1));
        let a: u64 = root.child(7).rng().gen();
        let b: u64 = root.child(7).rng().gen();
        assert_eq!(a, b);
    }
}
