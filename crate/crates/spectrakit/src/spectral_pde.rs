//! Heat evolution u_t = A u solved two ways: spectrally through the
//! transform (exact semigroup on the diagonalization) and by a
//! Crank-Nicolson finite-difference scheme used as an independent
//! cross-check.

use std::sync::Arc;

use crate::error::{Result, SpectraError};
use crate::interp;
use crate::quadgrid::{SpatialGrid, SpectralGrid};
use crate::transforms::{
    discrete_coefficients, forward, inverse, DegenerateTransform, SampledFunction,
    SpectralFunction, TransformKind,
};

/// Exponents below e^{-46} contribute nothing at double precision.
const EXP_CUTOFF: f64 = 46.0;

/// Spectral heat solution split into its continuous and discrete parts.
#[derive(Debug, Clone)]
pub struct HeatSolveResult {
    pub grid: Arc<SpatialGrid>,
    /// u(., t) = continuous_part + discrete_part
    pub values: Vec<f64>,
    pub continuous_part: Vec<f64>,
    pub discrete_part: Vec<f64>,
    /// Mode coefficients e^{lambda_k t} (f, e_k) at time t.
    pub mode_coefficients: Vec<f64>,
}

/// e^{tA} f by damping the spectral density with e^{mu(s) t} and growing the
/// mode coefficients with e^{lambda_k t}.
pub fn heat_evolve(
    transform: &DegenerateTransform,
    f: &SampledFunction,
    sg: &Arc<SpectralGrid>,
    t: f64,
) -> Result<HeatSolveResult> {
    if !(t >= 0.0) {
        return Err(SpectraError::InvalidParameter(format!(
            "heat evolution needs t >= 0, got {t}"
        )));
    }
    let fhat = forward(transform, f, sg)?;
    let damped_values: Vec<f64> = fhat
        .grid
        .s_nodes
        .iter()
        .zip(&fhat.values)
        .map(|(&s, &v)| {
            let e = -transform.eigenvalue_map(s) * t; // s^2 t
            if e > EXP_CUTOFF {
                0.0
            } else {
                v * (-e).exp()
            }
        })
        .collect();
    let damped = SpectralFunction::new(Arc::clone(sg), damped_values)?;
    let continuous = inverse(transform, &damped, &f.grid)?;
    let coeffs = discrete_coefficients(transform, f)?;
    let mode_coefficients: Vec<f64> = coeffs
        .iter()
        .zip(&transform.modes)
        .map(|(c, m)| c * (m.eigenvalue * t).exp())
        .collect();
    let mut discrete_part = vec![0.0; f.grid.len()];
    for (c, mode) in mode_coefficients.iter().zip(&transform.modes) {
        for (d, &x) in discrete_part.iter_mut().zip(&f.grid.nodes) {
            *d += c * (mode.eigenfunction)(x);
        }
    }
    let values: Vec<f64> = continuous
        .values
        .iter()
        .zip(&discrete_part)
        .map(|(a, b)| a + b)
        .collect();
    Ok(HeatSolveResult {
        grid: Arc::clone(&f.grid),
        values,
        continuous_part: continuous.values,
        discrete_part,
        mode_coefficients,
    })
}

/// Finite-difference configuration for the cross-check solver.
#[derive(Debug, Clone, Copy)]
pub struct CnConfig {
    /// Number of uniform intervals.
    pub n: usize,
    /// Time step (shortened to divide t exactly).
    pub dt: f64,
    /// Far endpoint where a homogeneous Dirichlet condition is imposed.
    pub x_far: f64,
}

impl Default for CnConfig {
    fn default() -> Self {
        CnConfig { n: 8000, dt: 1e-3, x_far: 40.0 }
    }
}

/// Tridiagonal solve (Thomas algorithm); overwrites the inputs.
fn thomas(sub: &mut [f64], diag: &mut [f64], sup: &mut [f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for i in 1..n {
        if diag[i - 1].abs() < 1e-300 {
            return Err(SpectraError::Instability("singular tridiagonal pivot".into()));
        }
        let m = sub[i] / diag[i - 1];
        diag[i] -= m * sup[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    if diag[n - 1].abs() < 1e-300 {
        return Err(SpectraError::Instability("singular tridiagonal pivot".into()));
    }
    rhs[n - 1] /= diag[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - sup[i] * rhs[i + 1]) / diag[i];
    }
    Ok(())
}

/// Crank-Nicolson reference solution of u_t = A u from the analytic initial
/// profile `f0`, on a uniform mesh with the transform's boundary condition at
/// the near end and homogeneous Dirichlet at `x_far`. Returns the mesh and
/// the terminal profile.
pub fn crank_nicolson_reference(
    transform: &DegenerateTransform,
    f0: &dyn Fn(f64) -> f64,
    t: f64,
    cfg: &CnConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(t >= 0.0) || !(cfg.dt > 0.0) || cfg.n < 16 || !(cfg.x_far > transform.x_start) {
        return Err(SpectraError::InvalidParameter(
            "Crank-Nicolson needs t >= 0, dt > 0, n >= 16, x_far beyond the domain start".into(),
        ));
    }
    let x0 = transform.x_start;
    let h = (cfg.x_far - x0) / cfg.n as f64;
    let xs: Vec<f64> = (0..=cfg.n).map(|j| x0 + h * j as f64).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| f0(x)).collect();
    *u.last_mut().unwrap() = 0.0;
    if t == 0.0 {
        return Ok((xs, u));
    }

    // rows of the spatial operator L (sub, diag, sup); boundary rows fold in
    // the ghost point dictated by the transform's boundary condition
    let n_rows = cfg.n; // unknowns j = 0..n-1; u_n = 0 stays fixed
    let mut l_sub = vec![0.0; n_rows];
    let mut l_diag = vec![0.0; n_rows];
    let mut l_sup = vec![0.0; n_rows];
    let inv_h2 = 1.0 / (h * h);
    let (row_coeffs, ghost_gamma, dirichlet_left): (
        Box<dyn Fn(f64) -> (f64, f64, f64)>,
        f64,
        bool,
    ) = match transform.kind {
        TransformKind::Sine => (Box::new(move |_x| (inv_h2, -2.0 * inv_h2, inv_h2)), 0.0, true),
        TransformKind::Cosine => (Box::new(move |_x| (inv_h2, -2.0 * inv_h2, inv_h2)), 0.0, false),
        TransformKind::Robin { a } => (
            Box::new(move |_x| (inv_h2, -2.0 * inv_h2, inv_h2)),
            2.0 * h * a,
            false,
        ),
        TransformKind::WeberMixed { k, r0 } => {
            let kk = (k * k) as f64;
            (
                Box::new(move |r: f64| {
                    (
                        inv_h2 - 0.5 / (h * r),
                        -2.0 * inv_h2 - kk / (r * r),
                        inv_h2 + 0.5 / (h * r),
                    )
                }),
                2.0 * h * k as f64 / r0,
                false,
            )
        }
    };
    for j in 0..n_rows {
        let (cm, c0, cp) = row_coeffs(xs[j]);
        if j == 0 {
            if dirichlet_left {
                l_diag[0] = 0.0; // row stays identity; u_0 pinned to 0
            } else {
                l_diag[0] = c0 + cm * ghost_gamma;
                l_sup[0] = cm + cp;
            }
        } else {
            l_sub[j] = cm;
            l_diag[j] = c0;
            l_sup[j] = cp;
        }
    }
    if dirichlet_left {
        u[0] = 0.0;
    }

    let steps = (t / cfg.dt).ceil().max(1.0) as usize;
    let dt = t / steps as f64;
    let lambda_plus = transform
        .modes
        .iter()
        .map(|m| m.eigenvalue.max(0.0))
        .fold(0.0f64, f64::max);
    let start_amp = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let growth_bound = 10.0 * start_amp.max(1e-300) * ((lambda_plus + 1.0) * t).exp();

    let half = 0.5 * dt;
    let mut rhs = vec![0.0; n_rows];
    for _ in 0..steps {
        // rhs = (I + dt/2 L) u
        for j in 0..n_rows {
            let um = if j == 0 { 0.0 } else { u[j - 1] };
            rhs[j] = u[j] + half * (l_sub[j] * um + l_diag[j] * u[j] + l_sup[j] * u[j + 1]);
        }
        if dirichlet_left {
            rhs[0] = 0.0;
        }
        let mut a: Vec<f64> = l_sub.iter().map(|v| -half * v).collect();
        let mut b: Vec<f64> = l_diag.iter().map(|v| 1.0 - half * v).collect();
        let mut c: Vec<f64> = l_sup.iter().map(|v| -half * v).collect();
        if dirichlet_left {
            b[0] = 1.0;
            c[0] = 0.0;
        }
        thomas(&mut a, &mut b, &mut c, &mut rhs)?;
        u[..n_rows].copy_from_slice(&rhs);
        let amp = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !amp.is_finite() || amp > growth_bound {
            return Err(SpectraError::Instability(format!(
                "amplitude {amp:.3e} exceeds the semigroup growth bound {growth_bound:.3e}"
            )));
        }
    }
    Ok((xs, u))
}

/// Relative weighted-L2 distance of the spectral solution from the
/// finite-difference profile, interpolated onto the quadrature grid.
pub fn compare_solutions(spectral: &HeatSolveResult, mesh: &[f64], fd: &[f64]) -> f64 {
    let fd_on_grid = interp::resample(mesh, fd, &spectral.grid.nodes);
    let mut num = 0.0;
    let mut den = 0.0;
    for ((a, b), w) in spectral
        .values
        .iter()
        .zip(&fd_on_grid)
        .zip(&spectral.grid.weights)
    {
        num += (a - b) * (a - b) * w;
        den += b * b * w;
    }
    (num / den.max(1e-28)).sqrt()
}
