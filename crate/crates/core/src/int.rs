//! Arbitrary-precision integers used by every exact computation.

pub use dashu_int::IBig as Int;
use dashu_int::ops::BitTest;
use num_traits::Signed;

pub fn int(v: i64) -> Int {
    Int::from(v)
}

/// Natural log of |x| for nonzero x.
pub fn ln_abs(x: &Int) -> f64 {
    assert!(!x.is_zero(), "log of zero");
    let a = x.abs();
    let bits = a.bit_len();
    if bits <= 900 {
        return a.to_f64().value().ln();
    }
    let shift = bits - 64;
    let top: Int = a >> shift;
    top.to_f64().value().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Floor division for b > 0.
pub fn floor_div(a: &Int, b: &Int) -> Int {
    let r = num_integer::Integer::mod_floor(a, b);
    (a - r) / b
}

pub fn to_f64(x: &Int) -> f64 {
    x.to_f64().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logs() {
        let x = int(1) << 3000usize;
        assert!((ln_abs(&x) - 3000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((ln_abs(&int(-10)) - 10f64.ln()).abs() < 1e-15);
        assert_eq!(floor_div(&int(-5), &int(13)), int(-1));
        assert_eq!(floor_div(&int(26), &int(13)), int(2));
        assert_eq!(floor_div(&int(-26), &int(13)), int(-2));
    }
}
