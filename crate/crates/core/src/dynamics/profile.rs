//! Polynomial smoothstep family. S_N has N vanishing derivatives at 0 and 1;
//! its derivative is proportional to (s(1-s))^N, used as the bump.

fn binom(n: u64, k: u64) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// S_N(u) on [0, 1], clamped outside.
pub fn smoothstep(order: u32, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let n = order as u64;
    let mut sum = 0.0;
    for k in 0..=n {
        sum += binom(n + k, k) * binom(2 * n + 1, n - k) * (-u).powi(k as i32);
    }
    u.powi(order as i32 + 1) * sum
}

/// (4s(1-s))^N on [0, 1], zero outside; peak 1 at s = 1/2.
pub fn bump(order: u32, s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    (4.0 * s * (1.0 - s)).powi(order as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_shape() {
        for order in 1..6 {
            assert_eq!(smoothstep(order, 0.0), 0.0);
            assert!((smoothstep(order, 1.0 - 1e-15) - 1.0).abs() < 1e-9);
            assert!((smoothstep(order, 0.5) - 0.5).abs() < 1e-12);
            let mut prev = 0.0;
            for i in 1..100 {
                let v = smoothstep(order, i as f64 / 100.0);
                assert!(v >= prev);
                prev = v;
            }
        }
        let u = 0.3f64;
        assert!((smoothstep(1, u) - (3.0 * u * u - 2.0 * u * u * u)).abs() < 1e-15);
        assert!((smoothstep(2, u) - (6.0 * u.powi(5) - 15.0 * u.powi(4) + 10.0 * u.powi(3))).abs() < 1e-15);
    }

    #[test]
    fn bump_shape() {
        assert_eq!(bump(3, 0.5), 1.0);
        assert_eq!(bump(3, 0.0), 0.0);
        assert_eq!(bump(3, 1.2), 0.0);
    }
}
