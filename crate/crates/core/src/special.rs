//! Log-gamma for real and complex arguments (Lanczos, g = 7, nine terms).

use std::f64::consts::PI;

use num_complex::Complex64;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    if x == x.trunc() {
        return 0.0;
    }
    let r = x.rem_euclid(2.0);
    if r <= 0.5 {
        (PI * r).sin()
    } else if r <= 1.5 {
        (PI * (1.0 - r)).sin()
    } else {
        (PI * (r - 2.0)).sin()
    }
}

/// `ln |Gamma(x)|` for real `x`; `+inf` at the poles.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let s = sin_pi(x);
        if s == 0.0 {
            return f64::INFINITY;
        }
        return PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS_COEF[0];
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + acc.ln()
}

/// `Gamma(x)` for real `x`.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.trunc() {
        return f64::NAN;
    }
    let sign = if x > 0.0 || (x.floor() as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    sign * ln_gamma(x).exp()
}

/// Principal-branch-free `ln sin(pi z)`, stable for large `|Im z|`.
/// Only the value modulo `2 pi i` is meaningful.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    if z.im.abs() < 1.0 {
        let s = Complex64::new(sin_pi(z.re) * (PI * z.im).cosh(), cos_pi(z.re) * (PI * z.im).sinh());
        return s.ln();
    }
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin(pi z) = -e^{-i pi z} (1 - e^{2 i pi z}) / (2i) = e^{-i pi z} (1 - e^{2 i pi z}) i / 2
    let i = Complex64::new(0.0, 1.0);
    let small = (i * 2.0 * PI * z).exp();
    -i * PI * z + (Complex64::new(1.0, 0.0) - small).ln() + Complex64::new(-(2f64.ln()), PI / 2.0)
}

fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// Complex `ln Gamma(z)`, correct modulo `2 pi i`, which is all that
/// exponentiated products of gamma functions need.
pub fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        return Complex64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_complex(Complex64::new(1.0, 0.0) - z);
    }
    let z = z - 1.0;
    let mut acc = Complex64::new(LANCZOS_COEF[0], 0.0);
    for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc += *c / (z + i as f64);
    }
    let t = z + (LANCZOS_G + 0.5);
    (z + 0.5) * t.ln() - t + acc.ln() + HALF_LN_2PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(2.0)).abs() < 1e-14);
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-11);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((gamma(-1.5) - 4.0 * PI.sqrt() / 3.0).abs() < 1e-13);
        // ln 100! = 363.739375555563...
        assert!((ln_gamma(101.0) - 363.739_375_555_563_47).abs() < 1e-10);
        assert!(ln_gamma(-2.0).is_infinite());
    }

    #[test]
    fn sin_pi_zeros() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(sin_pi(-7.0), 0.0);
        assert!((sin_pi(0.5) - 1.0).abs() < 1e-16);
        assert!((sin_pi(-0.25) + 0.5f64.sqrt()).abs() < 1e-15);
        assert!((sin_pi(2.75) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn complex_agrees_with_real() {
        for &x in &[0.1, 0.5, 1.3, 4.7, 20.0, -0.3, -2.6] {
            let c = ln_gamma_complex(Complex64::new(x, 0.0));
            assert!((c.re - ln_gamma(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn complex_modulus_identity() {
        // |Gamma(1/2 + i y)|^2 = pi / cosh(pi y)
        for &y in &[0.5, 3.0, 15.0, 60.0] {
            let v = ln_gamma_complex(Complex64::new(0.5, y));
            let expect = 0.5 * (PI.ln() - (PI * y).cosh().ln());
            assert!((v.re - expect).abs() < 1e-11 * (1.0 + expect.abs()), "y = {y}");
        }
        // |Gamma(i y)|^2 = pi / (y sinh(pi y)), evaluated through the reflection branch
        for &y in &[0.7, 12.0] {
            let v = ln_gamma_complex(Complex64::new(0.0, y));
            let expect = 0.5 * (PI.ln() - y.ln() - (PI * y).sinh().ln());
            assert!((v.re - expect).abs() < 1e-11 * (1.0 + expect.abs()));
        }
    }

    #[test]
    fn continuous_across_branch_switches() {
        let e = 1e-9;
        for &(re, im) in &[(0.5, 0.3), (0.5, 3.0), (-0.2, 1.0), (0.3, 1.0), (-1.7, 1.0), (0.5, -2.0), (-0.4, -1.0)] {
            let g = |a: f64, b: f64| ln_gamma_complex(Complex64::new(a, b)).exp();
            let base = g(re, im);
            for (a, b) in [(re - e, im), (re + e, im), (re, im - e), (re, im + e)] {
                assert!((g(a, b) - base).norm() < 1e-7 * base.norm(), "jump near ({re}, {im})");
            }
        }
    }

    #[test]
    fn recurrence_phase() {
        // Gamma(z + 1) = z Gamma(z) including the phase
        let z = Complex64::new(-1.3, 7.5);
        let lhs = ln_gamma_complex(z + 1.0).exp();
        let rhs = z * ln_gamma_complex(z).exp();
        assert!((lhs - rhs).norm() < 1e-11 * lhs.norm());
    }
}
