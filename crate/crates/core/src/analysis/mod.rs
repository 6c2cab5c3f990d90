//! Diagnostics over fields and trajectories.

mod bounds;
mod fb;
mod growth;

use crate::error::{invalid, Error, Result};
use crate::evolution::Trajectory;
use crate::spectral::{holder_seminorm, inverse_transform, Complex64, PhysicalField, SpectralField};

pub use bounds::{
    lagrangian_stage_norms, spectral_stage_norms, upper_bound_checks, StageNorms, UpperBoundReport,
    UpperBoundRow,
};
pub use fb::{
    fb_scan, fit_same_pair_constant, gram, q_matrix, symmetric_eigenvalues, FbMode, FbReport,
    SignPattern,
};
pub use growth::{
    fb_principle_iterates, growth_envelope, growth_report, FbIterates, GrowthReport, GrowthRow,
};

/// `‖f‖_{L²}^{σ-1} ‖f‖_{Ḣ^σ} / ‖f‖_{Ḣ¹}^σ`, at least 1 by interpolation.
pub fn balanced_ratio(field: &SpectralField, sigma: f64) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(invalid("sigma", sigma, "balanced ratio needs sigma > 1"));
    }
    let h1 = field.sobolev_norm(1.0, true)?;
    if h1 == 0.0 {
        return Err(Error::ZeroField);
    }
    let l2 = field.l2_norm();
    let hs = field.sobolev_norm(sigma, true)?;
    Ok(l2.powf(sigma - 1.0) * hs / h1.powf(sigma))
}

/// `‖P_{>N} f‖_{L²} / ‖f‖_{L²}` with `N = c ‖f‖_{H¹}/‖f‖_{L²}`.
pub fn spectrum_bump_ratio(field: &SpectralField, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(invalid("c", c, "bump constant must be positive"));
    }
    let l2 = field.l2_norm();
    if l2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let cutoff = c * field.sobolev_norm(1.0, false)? / l2;
    Ok(field.project_high(cutoff)?.l2_norm() / l2)
}

/// `χ = (1/16)(1 + C^{1/(σ-1)})^{-2σ/(σ-1)}`.
pub fn chi_bound(c: f64, sigma: f64) -> Result<f64> {
    if !(c >= 1.0) || !c.is_finite() {
        return Err(invalid("C", c, "must be finite and >= 1"));
    }
    if !(sigma > 1.0 && sigma <= 2.0) {
        return Err(invalid("sigma", sigma, "must lie in (1, 2]"));
    }
    let p = 1.0 / (sigma - 1.0);
    Ok((1.0 + c.powf(p)).powf(-2.0 * sigma * p) / 16.0)
}

/// Physical `∂_x f` and `∂_y f` by spectral differentiation; the Nyquist lines are
/// dropped since their derivative is not real.
pub fn gradient_fields(field: &SpectralField) -> (PhysicalField, PhysicalField) {
    let grid = field.grid();
    let n = grid.n();
    let nyq = grid.nyquist() as i64;
    let mut dx = field.clone();
    let mut dy = field.clone();
    for (idx, (cx, cy)) in dx.coeffs_mut().iter_mut().zip(dy.coeffs_mut().iter_mut()).enumerate() {
        let k = grid.wavenumber(idx % n);
        let l = grid.wavenumber(idx / n);
        if k == -nyq || l == -nyq {
            *cx = Complex64::default();
            *cy = Complex64::default();
            continue;
        }
        *cx *= Complex64::new(0.0, k as f64);
        *cy *= Complex64::new(0.0, l as f64);
    }
    (inverse_transform(&dx), inverse_transform(&dy))
}

/// Field norms at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2: f64,
    pub h1: f64,
    /// `‖f‖_{Ḣ^{1+s}}`
    pub hs: f64,
    pub linf: f64,
    /// `‖f‖_{L^∞} + ‖∇f‖_{L^∞}` on the grid.
    pub w1inf: f64,
    /// Grid `C^β` seminorm estimate.
    pub holder: f64,
    pub dissipation: f64,
    pub tail: f64,
    pub balanced: f64,
}

/// Exponents used by [`diagnose`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsSpec {
    pub s: f64,
    pub beta: f64,
    pub sigma: f64,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self {
            s: 0.45,
            beta: 0.2,
            sigma: 1.45,
        }
    }
}

pub fn diagnose(field: &SpectralField, t: f64, dissipation: f64, spec: DiagnosticsSpec) -> Result<DiagnosticsRecord> {
    let phys = inverse_transform(field);
    let (gx, gy) = gradient_fields(field);
    let grad_sup = gx
        .values()
        .iter()
        .zip(gy.values())
        .map(|(a, b)| a.hypot(*b))
        .fold(0.0_f64, f64::max);
    let linf = phys.linf_norm();
    let h1 = field.sobolev_norm(1.0, true)?;
    Ok(DiagnosticsRecord {
        t,
        l2: field.l2_norm(),
        h1,
        hs: field.sobolev_norm(1.0 + spec.s, true)?,
        linf,
        w1inf: linf + grad_sup,
        holder: holder_seminorm(&phys, spec.beta)?.seminorm,
        dissipation,
        tail: field.tail_fraction().fraction,
        balanced: if h1 > 0.0 {
            balanced_ratio(field, spec.sigma)?
        } else {
            f64::NAN
        },
    })
}

/// `E_κ` along a trajectory with the energy-balance residual.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationReport {
    pub kappa: f64,
    pub times: Vec<f64>,
    /// Energy removed by the exact heat substeps.
    pub exact: Vec<f64>,
    /// Trapezoidal `2κ∫‖∇f‖²` on the recorded times.
    pub trapezoid: Vec<f64>,
    /// `|‖f(t)‖² + E_κ(t) - ‖f₀‖²| / ‖f₀‖²`.
    pub residual: Vec<f64>,
    pub residual_trapezoid: Vec<f64>,
}

impl DissipationReport {
    /// `E_κ` at a recorded time; no interpolation.
    pub fn at(&self, t: f64) -> Option<f64> {
        self.times.iter().position(|&s| s == t).map(|i| self.exact[i])
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().cloned().fold(0.0, f64::max)
    }

    pub fn final_value(&self) -> f64 {
        *self.exact.last().expect("nonempty report")
    }
}

pub fn dissipation_functional(traj: &Trajectory, kappa: f64) -> Result<DissipationReport> {
    if traj.records.len() < 2 {
        return Err(Error::MissingRecords("E_kappa needs at least two gradient records"));
    }
    if traj.kappa != kappa {
        return Err(invalid("kappa", kappa, "does not match the trajectory diffusivity"));
    }
    let e0 = traj.initial().l2_sq;
    let mut rep = DissipationReport {
        kappa,
        times: Vec::new(),
        exact: Vec::new(),
        trapezoid: Vec::new(),
        residual: Vec::new(),
        residual_trapezoid: Vec::new(),
    };
    for r in &traj.records {
        rep.times.push(r.t);
        rep.exact.push(r.dissipation);
        rep.trapezoid.push(r.dissipation_trapezoid);
        rep.residual.push((r.l2_sq + r.dissipation - e0).abs() / e0);
        rep.residual_trapezoid
            .push((r.l2_sq + r.dissipation_trapezoid - e0).abs() / e0);
    }
    Ok(rep)
}
