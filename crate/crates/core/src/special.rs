//! Gamma values at half-integers and exact binomial coefficients.

use std::f64::consts::PI;

/// Largest `m` for which `gamma_half(m)` is evaluated as a direct product.
const DIRECT_GAMMA_LIMIT: u32 = 300;

/// Γ(m/2) for a positive integer `m`.
pub fn gamma_half(m: u32) -> f64 {
    assert!(m > 0, "gamma_half needs a positive argument");
    if m > DIRECT_GAMMA_LIMIT {
        return ln_gamma_half(m).exp();
    }
    let (mut acc, mut twice_x) = if m % 2 == 0 { (1.0, 2) } else { (PI.sqrt(), 1) };
    while twice_x < m {
        acc *= twice_x as f64 / 2.0;
        twice_x += 2;
    }
    acc
}

/// ln Γ(m/2) for a positive integer `m`.
pub fn ln_gamma_half(m: u32) -> f64 {
    assert!(m > 0, "ln_gamma_half needs a positive argument");
    let (mut acc, mut twice_x) = if m % 2 == 0 { (0.0, 2) } else { (0.5 * PI.ln(), 1) };
    while twice_x < m {
        acc += (twice_x as f64 / 2.0).ln();
        twice_x += 2;
    }
    acc
}

/// C(n, k) in exact integer arithmetic. Panics on u128 overflow, which is far
/// beyond any count this crate tabulates.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) after the multiplication.
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflows u128")
            / (i as u128 + 1);
    }
    acc
}

/// C(n, k) as a float, for weights and oracle values.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Surface area ω_d of the unit sphere in R^d.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d as u32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_at_small_half_integers() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(gamma_half(10), 24.0);
        assert!((gamma_half(7) - 15.0 / 8.0 * PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn log_and_direct_gamma_agree() {
        for m in 1..120 {
            let direct = gamma_half(m);
            let via_log = ln_gamma_half(m).exp();
            assert!((direct - via_log).abs() <= 1e-12 * direct, "m = {m}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(60, 30), 118264581564861424);
        assert_eq!(binomial_f64(12, 2), 66.0);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
