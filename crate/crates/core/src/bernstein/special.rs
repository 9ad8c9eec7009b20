//! Special functions needed for closed-form moments of the catalog densities.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * j as f64)
}

/// Lower incomplete gamma `γ(k, x) = ∫₀ˣ v^{k−1} e^{−v} dv` for integer `k ≥ 1`.
pub fn lower_gamma(k: u32, x: f64) -> f64 {
    assert!(k >= 1);
    if x <= 0.0 {
        return 0.0;
    }
    if x <= 1.0 {
        // Alternating series, free of the cancellation in 1 − e^{−x}Σ.
        let mut sum = 0.0;
        let mut term = x.powi(k as i32);
        let mut j = 0u32;
        loop {
            let contrib = term / (k + j) as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 * sum.abs() || j > 200 {
                break;
            }
            j += 1;
            term *= -x / j as f64;
        }
        sum
    } else {
        factorial(k - 1) - upper_gamma(k, x)
    }
}

/// Upper incomplete gamma `Γ(k, x) = ∫ₓ^∞ v^{k−1} e^{−v} dv` for integer `k ≥ 0`.
pub fn upper_gamma(k: u32, x: f64) -> f64 {
    if k == 0 {
        return exp_integral_e1(x);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..k {
        term *= x / j as f64;
        sum += term;
    }
    factorial(k - 1) * (-x).exp() * sum
}

/// Exponential integral `E₁(x) = ∫ₓ^∞ e^{−v}/v dv`, `x > 0`.
pub fn exp_integral_e1(x: f64) -> f64 {
    assert!(x > 0.0);
    if x <= 1.0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            let contrib = term / k as f64;
            sum += contrib;
            if contrib.abs() < 1e-18 {
                break;
            }
        }
        -EULER_GAMMA - x.ln() - sum
    } else {
        // Modified Lentz evaluation of the continued fraction.
        let tiny = 1e-300;
        let mut b = x + 1.0;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn e1_reference_values() {
        // Abramowitz & Stegun table 5.1.
        assert!((exp_integral_e1(1.0) - 0.219_383_934_395_520_3).abs() < 1e-14);
        assert!((exp_integral_e1(0.5) - 0.559_773_594_776_160_8).abs() < 1e-14);
        assert!((exp_integral_e1(5.0) - 1.148_295_591_275_326e-3).abs() < 1e-16);
    }

    #[test]
    fn incomplete_gammas_sum_to_factorial() {
        for k in 1..6 {
            for &x in &[1e-8, 0.3, 1.0, 2.5, 12.0] {
                let total = lower_gamma(k, x) + upper_gamma(k, x);
                assert!((total - factorial(k - 1)).abs() < 1e-13 * factorial(k - 1));
            }
        }
    }

    #[test]
    fn lower_gamma_matches_simpson() {
        let direct = simpson(|v| v * (-v).exp(), 0.0, 0.7, 2000);
        assert!((lower_gamma(2, 0.7) - direct).abs() < 1e-12);
    }
}
