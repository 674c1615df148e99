//! Counter-based deterministic random numbers.
//!
//! Every draw is a pure function of (seed, stream, counter), so experiments
//! reproduce bit-identically regardless of thread count or evaluation order.
//! The generator is a keyed SplitMix64-style finalizer; it is not
//! cryptographic, but its equidistribution is far more than Monte-Carlo work
//! here requires.

use num_complex::Complex64;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One uniform u64 for the given key triple.
#[inline]
pub fn counter_u64(seed: u64, stream: u64, counter: u64) -> u64 {
    let mut h = seed ^ 0x9e37_79b9_7f4a_7c15;
    h = mix64(h.wrapping_add(stream.wrapping_mul(0xd1b5_4a32_d192_ed03)));
    h = mix64(h ^ counter.wrapping_mul(0x2545_f491_4f6c_dd1d));
    mix64(h.wrapping_add(counter).wrapping_add(stream.rotate_left(17)))
}

/// Uniform in (0, 1]; never returns 0 so it is safe under log.
#[inline]
pub fn counter_unit_open(seed: u64, stream: u64, counter: u64) -> f64 {
    (((counter_u64(seed, stream, counter) >> 11) + 1) as f64) * (1.0 / 9_007_199_254_740_992.0)
}

/// Uniform in [0, 1).
#[inline]
pub fn counter_unit(seed: u64, stream: u64, counter: u64) -> f64 {
    ((counter_u64(seed, stream, counter) >> 11) as f64) * (1.0 / 9_007_199_254_740_992.0)
}

/// A standard complex Gaussian with E|xi|^2 = 1: xi = (X + iY)/sqrt(2) with
/// X, Y independent standard normals from Box-Muller on two counter draws.
pub fn complex_gaussian(seed: u64, stream: u64, index: u64) -> Complex64 {
    let u1 = counter_unit_open(seed, stream, 2 * index);
    let u2 = counter_unit(seed, stream, 2 * index + 1);
    let rad = (-2.0 * u1.ln()).sqrt();
    let ang = 2.0 * std::f64::consts::PI * u2;
    // (X + iY)/sqrt(2): each component has variance 1/2.
    Complex64::new(
        rad * ang.cos() / std::f64::consts::SQRT_2,
        rad * ang.sin() / std::f64::consts::SQRT_2,
    )
}

/// Derive a sub-seed for an indexed trial; used to give every Monte-Carlo
/// trial its own independent coefficient stream.
#[inline]
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    counter_u64(seed, 0x7472_6961_6c73, index) // "trials"
}
