//! Fixtures shared by the kernel benchmarks.

use rug::Integer;
use tatesha_core::level::{Level, LevelConfig};

pub fn level(q: u64, a: u32) -> Level {
    Level::new(LevelConfig::new(q, a)).expect("benchmark level")
}

/// Dense polynomial with `len` coefficients of roughly `bits` bits each.
/// Deterministic so runs are comparable.
pub fn dense_poly(len: usize, bits: u32) -> Vec<Integer> {
    let mut x = Integer::from(0x9e37_79b9_7f4a_7c15u64);
    let m = Integer::from(1) << bits;
    (0..len)
        .map(|i| {
            x = (x.clone() * 6364136223846793005u64 + 1442695040888963407u64) % &m;
            if i % 2 == 0 {
                x.clone()
            } else {
                -x.clone()
            }
        })
        .collect()
}
