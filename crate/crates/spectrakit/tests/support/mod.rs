//! Independent Bessel-function oracles for integration tests.
//!
//! Deliberately avoids the library's algorithms (Miller backward recurrence,
//! Hankel asymptotics, forward Y recurrence): small arguments use the
//! ascending power series, large arguments use the classical integral
//! representations evaluated by composite Simpson quadrature.
#![allow(dead_code)]

use std::f64::consts::PI;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// x at or below this uses the ascending series; above it the integral
/// representations (the series loses ~x/ln(10) digits to cancellation, the
/// integrals lose relative accuracy only where J_n is exponentially small,
/// i.e. for n well above x).
pub const SERIES_LIMIT: f64 = 12.0;

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn harmonic(n: usize) -> f64 {
    (1..=n).map(|k| 1.0 / k as f64).sum()
}

/// Ascending series: J_n(x) = sum_k (-1)^k (x/2)^{n+2k} / (k! (n+k)!).
pub fn series_j(n: u32, x: f64) -> f64 {
    let n = n as usize;
    let half = x / 2.0;
    let mut term = half.powi(n as i32) / factorial(n);
    let mut sum = term;
    for k in 1..200 {
        term *= -half * half / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() < 1e-20 * sum.abs().max(1e-30) {
            break;
        }
    }
    sum
}

/// Ascending series for the second kind (integer order):
/// Y_n = (2/pi) ln(x/2) J_n - (1/pi) sum_{k<n} (n-k-1)!/k! (x/2)^{2k-n}
///       - (1/pi) sum_k (-1)^k (psi(k+1)+psi(n+k+1)) (x/2)^{n+2k}/(k!(n+k)!).
pub fn series_y(n: u32, x: f64) -> f64 {
    let n = n as usize;
    let half = x / 2.0;
    let mut finite = 0.0;
    for k in 0..n {
        finite += factorial(n - k - 1) / factorial(k) * half.powi(2 * k as i32 - n as i32);
    }
    // psi(m+1) = -gamma + H_m
    let mut term = half.powi(n as i32) / factorial(n);
    let mut digamma_sum = term * (-2.0 * EULER_GAMMA + harmonic(0) + harmonic(n));
    for k in 1..200 {
        term *= -half * half / (k as f64 * (n + k) as f64);
        let add = term * (-2.0 * EULER_GAMMA + harmonic(k) + harmonic(n + k));
        digamma_sum += add;
        if add.abs() < 1e-20 * digamma_sum.abs().max(1e-30) {
            break;
        }
    }
    (2.0 / PI) * half.ln() * series_j(n as u32, x) - finite / PI - digamma_sum / PI
}

/// Composite Simpson on [a, b] with `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    assert!(n % 2 == 0);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Bessel's first integral: J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt.
pub fn integral_j(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    simpson(|t| (nf * t - x * t.sin()).cos(), 0.0, PI, 200_000) / PI
}

/// Y_n(x) = (1/pi) int_0^pi sin(x sin t - n t) dt
///          - (1/pi) int_0^inf (e^{n t} + (-1)^n e^{-n t}) e^{-x sinh t} dt.
pub fn integral_y(n: u32, x: f64) -> f64 {
    let nf = n as f64;
    let osc = simpson(|t| (x * t.sin() - nf * t).sin(), 0.0, PI, 200_000) / PI;
    // the exponential integrand underflows once x sinh t - n t > ~750
    let mut t_hi = 1.0f64;
    while x * t_hi.sinh() - nf * t_hi < 750.0 {
        t_hi += 0.5;
    }
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let tail = simpson(
        |t| ((nf * t).exp() + sign * (-nf * t).exp()) * (-x * t.sinh()).exp(),
        0.0,
        t_hi,
        200_000,
    ) / PI;
    osc - tail
}

/// Regime-selecting oracle values (J_n(x), Y_n(x)).
pub fn oracle_jy(n: u32, x: f64) -> (f64, f64) {
    if x <= SERIES_LIMIT {
        (series_j(n, x), series_y(n, x))
    } else {
        (integral_j(n, x), integral_y(n, x))
    }
}
