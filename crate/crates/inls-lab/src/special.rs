//! Log-gamma and Beta in double precision via a Lanczos approximation
//! (g = 7, nine coefficients), with the reflection formula below 1/2.
//!
//! The Beta function is evaluated in log space,
//! `B(x, y) = exp(lnΓ(x) + lnΓ(y) - lnΓ(x + y))`, which keeps relative error
//! near 1e-14 even when one argument is tiny and B is large.

use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
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

/// Natural logarithm of Γ(x) for x > 0.
///
/// Relative accuracy is about 1e-14 across (0, 170]; arguments below 1/2 go
/// through the reflection formula Γ(x)Γ(1-x) = π / sin(πx).
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x.is_finite() && x > 0.0, "ln_gamma requires x > 0");
    if x < 0.5 {
        // Reflection: ln Γ(x) = ln(π / sin(πx)) - ln Γ(1 - x).
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
    }
}

/// ln B(x, y) for x, y > 0.
pub fn ln_beta(x: f64, y: f64) -> f64 {
    ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y)
}

/// Beta function B(x, y) = Γ(x)Γ(y)/Γ(x+y) for x, y > 0.
pub fn beta(x: f64, y: f64) -> f64 {
    ln_beta(x, y).exp()
}
