//! Certification checks for a transform: Parseval balance, kernel
//! annihilation, inversion roundtrip, orthogonal splitting, diagonalization
//! of the operator, and spectral decay. Results serialize to JSON and CSV.

use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::quadgrid::{SpatialGrid, SpectralGrid};
use crate::testfn::TestFunctionSpec;
use crate::transforms::{
    discrete_coefficients, forward, inverse, reconstruct, relative_l2, DegenerateTransform,
    SampledFunction, SpectralFunction,
};

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Human-readable description of the inputs, or the reason the check is
    /// inapplicable.
    pub inputs: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64, inputs: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            inputs: inputs.into(),
        }
    }

    pub fn inapplicable(name: impl Into<String>, reason: impl Into<String>) -> Self {
        CheckResult {
            name: name.into(),
            residual: 0.0,
            tolerance: 0.0,
            passed: true,
            inputs: reason.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub kind: String,
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn new(kind: impl Into<String>) -> Self {
        ValidationReport { kind: kind.into(), checks: Vec::new() }
    }

    pub fn push(&mut self, check: CheckResult) {
        self.checks.push(check);
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| crate::SpectraError::Domain(format!("JSON serialization failed: {e}")))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,name,residual,tolerance,passed,inputs\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{:.16e},{:.16e},{},\"{}\"\n",
                self.kind, c.name, c.residual, c.tolerance, c.passed, c.inputs
            ));
        }
        out
    }
}

/// Tolerances for the standard battery.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub parseval: f64,
    pub annihilation: f64,
    pub roundtrip: f64,
    pub ortho: f64,
    pub diagonalization: f64,
    pub decay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            parseval: 1e-6,
            annihilation: 1e-6,
            roundtrip: 1e-4,
            ortho: 1e-4,
            diagonalization: 1e-6,
            decay: 1e-5,
        }
    }
}

/// Fit G(s) ~ A/s^2 + B/s^4 over the top of the spectral window and return
/// the closed-form remainder over (s_max, inf). Used to complete the
/// truncated spectral energy of slowly decaying transforms.
fn spectral_energy_tail(sg: &SpectralGrid, g: &[f64]) -> f64 {
    let s_max = sg.s_max;
    let lo = 0.65 * s_max;
    let (mut m11, mut m12, mut m22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let mut count = 0usize;
    for (i, &s) in sg.s_nodes.iter().enumerate() {
        if s < lo {
            continue;
        }
        let t = s_max / s;
        let (p, q) = (t * t, t * t * t * t);
        m11 += p * p;
        m12 += p * q;
        m22 += q * q;
        b1 += p * g[i];
        b2 += q * g[i];
        count += 1;
    }
    if count < 8 {
        return 0.0;
    }
    let det = m11 * m22 - m12 * m12;
    if det.abs() <= 1e-14 * m11 * m22 {
        return 0.0;
    }
    let c1 = (b1 * m22 - b2 * m12) / det;
    let c2 = (b2 * m11 - b1 * m12) / det;
    // integral over (s_max, inf) of c1 (S/s)^2 + c2 (S/s)^4
    (c1 * s_max + c2 * s_max / 3.0).max(0.0)
}

/// |  ||f||^2 - ||fhat||^2_w - sum (f,e_k)^2  | / ||f||^2, with the spectral
/// energy tail beyond s_max completed from an algebraic fit.
pub fn parseval_residual(
    transform: &DegenerateTransform,
    f: &SampledFunction,
    sg: &Arc<SpectralGrid>,
) -> Result<f64> {
    let fhat = forward(transform, f, sg)?;
    let f_energy: f64 = f
        .values
        .iter()
        .zip(&f.grid.weights)
        .map(|(v, w)| v * v * w)
        .sum();
    let g: Vec<f64> = sg
        .s_nodes
        .iter()
        .zip(&fhat.values)
        .map(|(&s, &v)| v * v * transform.spectral_weight(s))
        .collect();
    let mut spectral_energy = sg.integrate(&g)?;
    if transform.is_analytic() {
        spectral_energy += spectral_energy_tail(sg, &g);
    }
    let coeffs = discrete_coefficients(transform, f)?;
    let discrete_energy: f64 = coeffs.iter().map(|c| c * c).sum();
    Ok((f_energy - spectral_energy - discrete_energy).abs() / f_energy)
}

/// sup over the spectral nodes of |F e_k| sqrt(w): the transform must
/// annihilate its discrete modes.
pub fn kernel_annihilation(
    transform: &DegenerateTransform,
    grid: &Arc<SpatialGrid>,
    sg: &Arc<SpectralGrid>,
    mode_index: usize,
) -> Result<f64> {
    let mode = transform.modes[mode_index].eigenfunction.clone();
    let f = SampledFunction::from_fn(Arc::clone(grid), |x| mode(x));
    let fhat = forward(transform, &f, sg)?;
    Ok(fhat
        .values
        .iter()
        .zip(&sg.s_nodes)
        .map(|(&v, &s)| v.abs() * transform.spectral_weight(s).sqrt())
        .fold(0.0, f64::max))
}

/// Relative L2 error of F*F f + sum (f,e_k) e_k against f.
pub fn roundtrip_error(
    transform: &DegenerateTransform,
    f: &SampledFunction,
    sg: &Arc<SpectralGrid>,
) -> Result<f64> {
    let rec = reconstruct(transform, f, sg)?;
    Ok(relative_l2(&rec, f))
}

/// Orthogonal splitting f = P_c f + P_d f: returns the recombination
/// residual, the largest mode coefficient of the continuous part, and the
/// annihilation sup of the discrete part.
pub fn ortho_projection_check(
    transform: &DegenerateTransform,
    f: &SampledFunction,
    sg: &Arc<SpectralGrid>,
) -> Result<(f64, f64, f64)> {
    let fhat = forward(transform, f, sg)?;
    let p_cont = inverse(transform, &fhat, &f.grid)?;
    let coeffs = discrete_coefficients(transform, f)?;
    let mut p_disc = vec![0.0; f.grid.len()];
    for (c, mode) in coeffs.iter().zip(&transform.modes) {
        for (v, &x) in p_disc.iter_mut().zip(&f.grid.nodes) {
            *v += c * (mode.eigenfunction)(x);
        }
    }
    let combined = SampledFunction::new(
        Arc::clone(&f.grid),
        p_cont
            .values
            .iter()
            .zip(&p_disc)
            .map(|(a, b)| a + b)
            .collect(),
    )?;
    let recombination = relative_l2(&combined, f);

    let cont_coeffs = discrete_coefficients(transform, &p_cont)?;
    let worst_cont = cont_coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())) / f.norm().max(1e-300);

    let disc_f = SampledFunction::new(Arc::clone(&f.grid), p_disc)?;
    let disc_hat = forward(transform, &disc_f, sg)?;
    let worst_disc = disc_hat
        .values
        .iter()
        .zip(&sg.s_nodes)
        .map(|(&v, &s)| v.abs() * transform.spectral_weight(s).sqrt())
        .fold(0.0, f64::max)
        / f.norm().max(1e-300);
    Ok((recombination, worst_cont, worst_disc))
}

/// || F[A f] - mu fhat ||_w / || mu fhat ||_w for an analytic input with
/// closed-form image under the operator.
pub fn diagonalization_residual(
    transform: &DegenerateTransform,
    spec: &TestFunctionSpec,
    grid: &Arc<SpatialGrid>,
    sg: &Arc<SpectralGrid>,
) -> Result<f64> {
    let f = SampledFunction::from_spec(Arc::clone(grid), spec);
    let af = SampledFunction::from_fn(Arc::clone(grid), |x| transform.apply_operator(spec, x));
    let fhat = forward(transform, &f, sg)?;
    let afhat = forward(transform, &af, sg)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &s) in sg.s_nodes.iter().enumerate() {
        let w = transform.spectral_weight(s) * sg.weights[i];
        let target = transform.eigenvalue_map(s) * fhat.values[i];
        num += (afhat.values[i] - target) * (afhat.values[i] - target) * w;
        den += target * target * w;
    }
    Ok((num / den.max(1e-300)).sqrt())
}

/// Parseval balance for A f: | ||Af||^2 - ||mu fhat||^2_w - sum lambda_k^2
/// c_k^2 | / ||Af||^2. Certifies that mu fhat is square-integrable with the
/// right norm, i.e. the spectral data decays.
pub fn decay_residual(
    transform: &DegenerateTransform,
    spec: &TestFunctionSpec,
    grid: &Arc<SpatialGrid>,
    sg: &Arc<SpectralGrid>,
) -> Result<f64> {
    let f = SampledFunction::from_spec(Arc::clone(grid), spec);
    let af = SampledFunction::from_fn(Arc::clone(grid), |x| transform.apply_operator(spec, x));
    let af_energy: f64 = af
        .values
        .iter()
        .zip(&grid.weights)
        .map(|(v, w)| v * v * w)
        .sum();
    let fhat = forward(transform, &f, sg)?;
    let g: Vec<f64> = sg
        .s_nodes
        .iter()
        .zip(&fhat.values)
        .map(|(&s, &v)| {
            let mv = transform.eigenvalue_map(s) * v;
            mv * mv * transform.spectral_weight(s)
        })
        .collect();
    let spectral_energy = sg.integrate(&g)?;
    let coeffs = discrete_coefficients(transform, &f)?;
    let discrete_energy: f64 = coeffs
        .iter()
        .zip(&transform.modes)
        .map(|(c, m)| (m.eigenvalue * c) * (m.eigenvalue * c))
        .sum();
    Ok((af_energy - spectral_energy - discrete_energy).abs() / af_energy.max(1e-300))
}

/// Run the full battery for one transform on the given grids and inputs.
pub fn standard_report(
    transform: &DegenerateTransform,
    grid: &Arc<SpatialGrid>,
    sg: &Arc<SpectralGrid>,
    specs: &[TestFunctionSpec],
    tol: &Tolerances,
) -> Result<ValidationReport> {
    let mut report = ValidationReport::new(transform.kind.name());
    for spec in specs {
        spec.validate(grid.x_start, grid.x_trunc)?;
        let f = SampledFunction::from_spec(Arc::clone(grid), spec);
        let label = spec.describe();
        report.push(CheckResult::new(
            format!("parseval[{label}]"),
            parseval_residual(transform, &f, sg)?,
            tol.parseval,
            &label,
        ));
        report.push(CheckResult::new(
            format!("roundtrip[{label}]"),
            roundtrip_error(transform, &f, sg)?,
            tol.roundtrip,
            &label,
        ));
        if transform.modes.is_empty() {
            report.push(CheckResult::inapplicable(
                format!("ortho[{label}]"),
                "no discrete modes: splitting is trivial",
            ));
        } else {
            let (recomb, cont, disc) = ortho_projection_check(transform, &f, sg)?;
            let worst = recomb.max(cont).max(disc);
            report.push(CheckResult::new(
                format!("ortho[{label}]"),
                worst,
                tol.ortho,
                &label,
            ));
        }
        report.push(CheckResult::new(
            format!("diagonalization[{label}]"),
            diagonalization_residual(transform, spec, grid, sg)?,
            tol.diagonalization,
            &label,
        ));
        report.push(CheckResult::new(
            format!("decay[{label}]"),
            decay_residual(transform, spec, grid, sg)?,
            tol.decay,
            &label,
        ));
    }
    if transform.modes.is_empty() {
        report.push(CheckResult::inapplicable(
            "annihilation",
            "no discrete modes to annihilate",
        ));
    } else {
        for k in 0..transform.modes.len() {
            report.push(CheckResult::new(
                format!("annihilation[mode {k}]"),
                kernel_annihilation(transform, grid, sg, k)?,
                tol.annihilation,
                format!("lambda = {}", transform.modes[k].eigenvalue),
            ));
        }
    }
    Ok(report)
}

/// Weighted norm of the spectral data (convenience re-export for callers
/// assembling their own reports).
pub fn spectral_norm(transform: &DegenerateTransform, fhat: &SpectralFunction) -> f64 {
    fhat.weighted_norm(transform)
}
