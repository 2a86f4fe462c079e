//! Sine and cosine integrals, used by the spectral-tail completion of slowly
//! decaying transforms.

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_CUTOFF: f64 = 18.0;

/// Auxiliary asymptotic functions: Si(x) = pi/2 - f cos x - g sin x,
/// Ci(x) = f sin x - g cos x, for x above the series cutoff.
fn aux_fg(x: f64) -> (f64, f64) {
    let x2 = x * x;
    let mut f = 0.0;
    let mut g = 0.0;
    // f ~ (1/x) sum (-1)^m (2m)!/x^{2m}; g ~ (1/x^2) sum (-1)^m (2m+1)!/x^{2m}
    let mut tf = 1.0;
    let mut tg = 1.0;
    let mut prev = f64::INFINITY;
    for m in 0.. {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        f += sign * tf;
        g += sign * tg;
        let mf = m as f64;
        let nf = tf * (2.0 * mf + 1.0) * (2.0 * mf + 2.0) / x2;
        if nf >= prev {
            break;
        }
        prev = nf;
        tf = nf;
        tg *= (2.0 * mf + 2.0) * (2.0 * mf + 3.0) / x2;
        if tf < 1e-18 {
            break;
        }
    }
    (f / x, g / x2)
}

/// Sine integral Si(x) = integral of sin t / t over (0, x).
pub fn si(x: f64) -> f64 {
    if x < 0.0 {
        return -si(-x);
    }
    if x <= SERIES_CUTOFF {
        let mut sum = 0.0;
        let mut term = x; // x^{2k+1} / (2k+1)!
        for k in 0..120 {
            let kf = 2.0 * k as f64 + 1.0;
            let add = term / kf;
            sum += if k % 2 == 0 { add } else { -add };
            term *= x * x / ((kf + 1.0) * (kf + 2.0));
            if term / (kf + 2.0) < 1e-18 {
                break;
            }
        }
        sum
    } else {
        let (f, g) = aux_fg(x);
        std::f64::consts::FRAC_PI_2 - f * x.cos() - g * x.sin()
    }
}

/// Cosine integral Ci(x) = -integral of cos t / t over (x, inf), x > 0.
pub fn ci(x: f64) -> f64 {
    assert!(x > 0.0, "ci requires x > 0");
    if x <= SERIES_CUTOFF {
        let mut sum = 0.0;
        let mut term = x * x / 2.0; // x^{2k} / (2k)!
        for k in 1..120 {
            let kf = 2.0 * k as f64;
            let add = term / kf;
            sum += if k % 2 == 1 { -add } else { add };
            term *= x * x / ((kf + 1.0) * (kf + 2.0));
            if term / (kf + 2.0) < 1e-18 {
                break;
            }
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        let (f, g) = aux_fg(x);
        f * x.sin() - g * x.cos()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn known_values() {
        // reference values from standard tables
        assert_relative_eq!(si(1.0), 0.946083070367183, max_relative = 1e-12);
        assert_relative_eq!(si(10.0), 1.658347594218874, max_relative = 1e-12);
        assert_relative_eq!(ci(1.0), 0.337403922900968, max_relative = 1e-12);
        assert_relative_eq!(ci(10.0), -0.045456433004455, max_relative = 1e-9);
    }

    #[test]
    fn crossover_accuracy() {
        for &x in &[17.9, 18.0, 18.1, 25.0, 100.0, 1e4] {
            // Si approaches pi/2, Ci approaches 0
            assert!((si(x) - std::f64::consts::FRAC_PI_2).abs() < 2.0 / x);
            assert!(ci(x).abs() < 2.0 / x);
        }
        // reference values just beside the series/asymptotic switch
        assert_relative_eq!(si(17.99982), 1.5366156073654512, max_relative = 1e-8);
        assert_relative_eq!(si(18.00018), 1.5366005876205885, max_relative = 1e-8);
        // the asymptotic side is limited by optimal truncation (~1e-8 absolute)
        assert_relative_eq!(ci(17.99982), -0.04348170552367083, epsilon = 2e-8);
        assert_relative_eq!(ci(18.00018), -0.04346849918958581, epsilon = 2e-8);
    }

    #[test]
    fn derivative_matches_integrand() {
        // h large enough that the ~1e-12 evaluation noise stays subdominant
        let h = 1e-4;
        for &x in &[0.5, 3.0, 12.0, 30.0, 200.0] {
            let d = (si(x + h) - si(x - h)) / (2.0 * h);
            assert_relative_eq!(d, x.sin() / x, epsilon = 1e-7);
            let d = (ci(x + h) - ci(x - h)) / (2.0 * h);
            assert_relative_eq!(d, x.cos() / x, epsilon = 1e-7);
        }
    }
}
