//! Analytic test inputs with closed-form derivatives, so the image under the
//! Sturm-Liouville operator is available without numerical differentiation.

use crate::error::{Result, SpectraError};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TestFunctionSpec {
    /// exp(-(x-center)^2 / (2 width^2))
    Gaussian { center: f64, width: f64 },
    /// Compactly supported bump on (center-halfwidth, center+halfwidth),
    /// all derivatives vanish at the support boundary.
    SmoothBump { center: f64, halfwidth: f64 },
    /// exp(-rate * x)
    ExpDecay { rate: f64 },
    /// x^(-exponent), for domains bounded away from zero.
    PowerDecay { exponent: f64 },
}

impl TestFunctionSpec {
    pub fn validate(&self, x_start: f64, x_trunc: f64) -> Result<()> {
        match *self {
            TestFunctionSpec::Gaussian { width, .. } => {
                if width <= 0.0 {
                    return Err(SpectraError::InvalidParameter("Gaussian width <= 0".into()));
                }
            }
            TestFunctionSpec::SmoothBump { center, halfwidth } => {
                if halfwidth <= 0.0 {
                    return Err(SpectraError::InvalidParameter("bump halfwidth <= 0".into()));
                }
                if center - halfwidth <= x_start || center + halfwidth >= x_trunc {
                    return Err(SpectraError::InvalidParameter(format!(
                        "bump support [{}, {}] must lie strictly inside ({x_start}, {x_trunc})",
                        center - halfwidth,
                        center + halfwidth
                    )));
                }
            }
            TestFunctionSpec::ExpDecay { rate } => {
                if rate <= 0.0 {
                    return Err(SpectraError::InvalidParameter("ExpDecay rate <= 0".into()));
                }
            }
            TestFunctionSpec::PowerDecay { exponent } => {
                if exponent <= 0.5 || x_start <= 0.0 {
                    return Err(SpectraError::InvalidParameter(
                        "PowerDecay needs exponent > 1/2 and x_start > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunctionSpec::Gaussian { center, width } => {
                let u = (x - center) / width;
                (-0.5 * u * u).exp()
            }
            TestFunctionSpec::SmoothBump { center, halfwidth } => {
                let u = (x - center) / halfwidth;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (1.0 - 1.0 / (1.0 - u * u)).exp()
                }
            }
            TestFunctionSpec::ExpDecay { rate } => (-rate * x).exp(),
            TestFunctionSpec::PowerDecay { exponent } => x.powf(-exponent),
        }
    }

    /// First derivative.
    pub fn deriv1(&self, x: f64) -> f64 {
        match *self {
            TestFunctionSpec::Gaussian { center, width } => {
                let u = (x - center) / width;
                -u / width * (-0.5 * u * u).exp()
            }
            TestFunctionSpec::SmoothBump { center, halfwidth } => {
                let u = (x - center) / halfwidth;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let d = 1.0 - u * u;
                    self.eval(x) * (-2.0 * u / (d * d)) / halfwidth
                }
            }
            TestFunctionSpec::ExpDecay { rate } => -rate * (-rate * x).exp(),
            TestFunctionSpec::PowerDecay { exponent } => -exponent * x.powf(-exponent - 1.0),
        }
    }

    /// Second derivative.
    pub fn deriv2(&self, x: f64) -> f64 {
        match *self {
            TestFunctionSpec::Gaussian { center, width } => {
                let u = (x - center) / width;
                (u * u - 1.0) / (width * width) * (-0.5 * u * u).exp()
            }
            TestFunctionSpec::SmoothBump { center, halfwidth } => {
                let u = (x - center) / halfwidth;
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    let d = 1.0 - u * u;
                    let g1 = -2.0 * u / (d * d);
                    let g2 = -2.0 / (d * d) - 8.0 * u * u / (d * d * d);
                    self.eval(x) * (g1 * g1 + g2) / (halfwidth * halfwidth)
                }
            }
            TestFunctionSpec::ExpDecay { rate } => rate * rate * (-rate * x).exp(),
            TestFunctionSpec::PowerDecay { exponent } => {
                exponent * (exponent + 1.0) * x.powf(-exponent - 2.0)
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            TestFunctionSpec::Gaussian { center, width } => format!("Gaussian({center},{width})"),
            TestFunctionSpec::SmoothBump { center, halfwidth } => {
                format!("SmoothBump({center},{halfwidth})")
            }
            TestFunctionSpec::ExpDecay { rate } => format!("ExpDecay({rate})"),
            TestFunctionSpec::PowerDecay { exponent } => format!("PowerDecay({exponent})"),
        }
    }
}
