use super::RandomnessError;
use crate::bitreal::BitPrefix;
use crate::series::RedundancyFunction;

/// Every `n >= 1` with `2^(n+1) <= |x|` such that positions
/// `2^n .. 2^(n+1) - 1` hold a run of at least `floor(n + g(n))` zeros.
pub fn zero_block_scan(x: &BitPrefix, g: &RedundancyFunction) -> Result<Vec<u64>, RandomnessError> {
    let bits = x.bits();
    let mut found = Vec::new();
    let mut n = 1u32;
    while n < 63 && (1usize << (n + 1)) <= bits.len() {
        let need = g.floor_eval(n as u64)? as usize;
        let window = &bits[(1 << n) - 1..(1 << (n + 1)) - 1];
        let mut run = 0;
        let mut best = 0;
        for &b in window {
            run = if b { 0 } else { run + 1 };
            best = best.max(run);
        }
        if best >= need {
            found.push(n as u64);
        }
        n += 1;
    }
    Ok(found)
}
