//! Log-domain arithmetic over nonnegative quantities.
//!
//! A zero quantity is represented by `f64::NEG_INFINITY`. Sums ignore it and
//! products are absorbed by it: `-inf + x = -inf`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

/// Log of the zero quantity.
pub const LOG_ZERO: f64 = f64::NEG_INFINITY;

/// `log(exp(a) + exp(b))`.
#[inline]
pub fn log_add(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO {
        return b;
    }
    if b == LOG_ZERO {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `log(sum exp(x_i))`, stable for large magnitudes. Empty input gives `LOG_ZERO`.
pub fn log_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let max = xs.iter().copied().fold(LOG_ZERO, f64::max);
    if max == LOG_ZERO {
        return LOG_ZERO;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `log(a * b)`; zero absorbs.
#[inline]
pub fn log_mul(a: f64, b: f64) -> f64 {
    if a == LOG_ZERO || b == LOG_ZERO {
        LOG_ZERO
    } else {
        a + b
    }
}

/// Natural log of an arbitrary-precision integer (`LOG_ZERO` for 0).
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return LOG_ZERO;
    }
    let bits = x.bits();
    if bits <= 960 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Relative closeness for log-domain values, treating two `LOG_ZERO`s as equal.
pub fn log_close(a: f64, b: f64, rel: f64) -> bool {
    if a == LOG_ZERO || b == LOG_ZERO {
        return a == b;
    }
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}
