//! Van Hove rescaling of a two-point function and the resulting white-noise
//! limit.
//!
//! For coupling `λ` the smeared two-point function of the rescaled field
//! `(1/λ) A(t/λ², ·)` is
//!
//! ```text
//! I_λ = ∫∫∫ f(t) conj(g(t')) λ⁻² exp(-i (t - t')/λ² · (ω - ω₀)) ρ(ω) dω dt dt'
//! ```
//!
//! and tends to `2π ρ(ω₀) ∫ f conj(g)` as `λ → 0`: the time-averaged field
//! becomes delta-correlated, with the energy shell `ω = ω₀` selected.
//!
//! The integral is evaluated with a fixed-step trapezoidal product rule.
//! Since `t - t'` only takes grid values `k·h`, the `ω` integral is done
//! once per lag `k` and the `(t, t')` sum is then a lag correlation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of standard deviations the quadrature domains must cover.
pub const COVERAGE_SIGMAS: f64 = 8.0;

/// Gaussian smearing function `f(t) = A exp(-(t - c)² / (2 w²))`, with
/// `A = (w √π)^{-1/2}` when unit-normalized (`∫ f² = 1`) and `A = 1`
/// otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub center: f64,
    pub width: f64,
    pub unit_norm: bool,
}

impl TestFunction {
    pub fn new(center: f64, width: f64, unit_norm: bool) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(Error::invalid(format!(
                "test function needs finite center and width > 0, got ({center}, {width})"
            )));
        }
        Ok(TestFunction {
            center,
            width,
            unit_norm,
        })
    }

    /// Unit-normalized Gaussian.
    pub fn unit(center: f64, width: f64) -> Result<Self> {
        Self::new(center, width, true)
    }

    pub fn amplitude(&self) -> f64 {
        if self.unit_norm {
            (self.width * PI.sqrt()).powf(-0.5)
        } else {
            1.0
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let z = (t - self.center) / self.width;
        self.amplitude() * (-0.5 * z * z).exp()
    }

    pub fn shifted(&self, offset: f64) -> Self {
        TestFunction {
            center: self.center + offset,
            ..*self
        }
    }

    /// Closed-form `∫ f(t) g(t) dt` for two Gaussians.
    pub fn overlap(&self, other: &TestFunction) -> f64 {
        let s2 = self.width * self.width + other.width * other.width;
        let d = self.center - other.center;
        self.amplitude()
            * other.amplitude()
            * (2.0 * PI * self.width * self.width * other.width * other.width / s2).sqrt()
            * (-d * d / (2.0 * s2)).exp()
    }
}

/// Gaussian spectral density `ρ(ω) = amplitude · N(ω; center, width²)`.
///
/// The optional particle dispersion values `ε(p)` and `ε(p+k)` move the
/// energy shell from `ω = ω₀` to `ω + ε(p) - ε(p+k) = ω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralDensity {
    pub center: f64,
    pub width: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub eps_p: f64,
    #[serde(default)]
    pub eps_pk: f64,
}

impl SpectralDensity {
    pub fn gaussian(center: f64, width: f64) -> Result<Self> {
        Self::new(center, width, 1.0)
    }

    pub fn new(center: f64, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) || !center.is_finite() {
            return Err(Error::invalid(
                "spectral density needs finite center and width > 0",
            ));
        }
        if !(amplitude >= 0.0 && amplitude.is_finite()) {
            return Err(Error::invalid(
                "spectral density amplitude must be finite and ≥ 0",
            ));
        }
        Ok(SpectralDensity {
            center,
            width,
            amplitude,
            eps_p: 0.0,
            eps_pk: 0.0,
        })
    }

    pub fn with_dispersion(self, eps_p: f64, eps_pk: f64) -> Self {
        SpectralDensity {
            eps_p,
            eps_pk,
            ..self
        }
    }

    pub fn scaled(self, factor: f64) -> Result<Self> {
        Self::new(self.center, self.width, self.amplitude * factor)
            .map(|r| r.with_dispersion(self.eps_p, self.eps_pk))
    }

    pub fn eval(&self, omega: f64) -> f64 {
        self.amplitude * gaussian_kernel(omega - self.center, self.width)
    }

    /// Field frequency selected by the shell condition.
    pub fn shell(&self, omega0: f64) -> f64 {
        omega0 + self.eps_pk - self.eps_p
    }
}

/// Fixed-step trapezoidal grids: `t ∈ [-t_half_width, t_half_width]`, and
/// `ω` within `omega_half_width` of the spectral density's center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub t_step: f64,
    pub t_half_width: f64,
    pub omega_step: f64,
    pub omega_half_width: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            t_step: 0.005,
            t_half_width: 8.0,
            omega_step: 0.005,
            omega_half_width: 8.0,
        }
    }
}

impl Quadrature {
    fn validate(&self) -> Result<()> {
        let all = [
            self.t_step,
            self.t_half_width,
            self.omega_step,
            self.omega_half_width,
        ];
        if all.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::Config(
                "quadrature steps and half-widths must be > 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescalingConfig {
    pub lambdas: Vec<f64>,
    pub omega0: f64,
    pub quadrature: Quadrature,
}

impl RescalingConfig {
    pub fn new(lambdas: Vec<f64>, omega0: f64, quadrature: Quadrature) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::invalid("at least one coupling λ is required"));
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            return Err(Error::invalid("couplings λ must be finite and > 0"));
        }
        if lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid("couplings λ must be strictly decreasing"));
        }
        quadrature.validate()?;
        Ok(RescalingConfig {
            lambdas,
            omega0,
            quadrature,
        })
    }
}

fn gaussian_kernel(x: f64, width: f64) -> f64 {
    let z = x / width;
    (-0.5 * z * z).exp() / (width * (2.0 * PI).sqrt())
}

fn trapezoid_grid(lo: f64, step: f64, intervals: usize) -> (Vec<f64>, Vec<f64>) {
    let nodes: Vec<f64> = (0..=intervals).map(|i| lo + i as f64 * step).collect();
    let mut weights = vec![step; intervals + 1];
    weights[0] *= 0.5;
    weights[intervals] *= 0.5;
    (nodes, weights)
}

fn intervals(half_width: f64, step: f64) -> usize {
    (2.0 * half_width / step).round() as usize
}

/// Closed-form `λ → 0` value `2π ρ(ω₀) ∫ f conj(g)`.
pub fn white_noise_limit(
    f: &TestFunction,
    g: &TestFunction,
    rho: &SpectralDensity,
    omega0: f64,
) -> f64 {
    2.0 * PI * rho.eval(rho.shell(omega0)) * f.overlap(g)
}

fn check_domains(
    lambda: f64,
    f: &TestFunction,
    g: &TestFunction,
    rho: &SpectralDensity,
    quad: &Quadrature,
) -> Result<()> {
    quad.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::invalid(format!(
            "coupling λ must be > 0, got {lambda}"
        )));
    }
    for (name, tf) in [("f", f), ("g", g)] {
        let reach = tf.center.abs() + COVERAGE_SIGMAS * tf.width;
        if reach > quad.t_half_width {
            return Err(Error::Config(format!(
                "time domain ±{} leaves tail mass > 1e-6 of {name} (needs ±{reach})",
                quad.t_half_width
            )));
        }
    }
    if COVERAGE_SIGMAS * rho.width > quad.omega_half_width {
        return Err(Error::Config(format!(
            "frequency half-width {} covers fewer than {COVERAGE_SIGMAS} widths of ρ",
            quad.omega_half_width
        )));
    }
    // The kernel's lag width is λ²/σ_ρ; the t grid must resolve it.
    let lag_width = lambda * lambda / rho.width;
    if quad.t_step > 0.5 * lag_width {
        return Err(Error::Config(format!(
            "time step {} too coarse for λ = {lambda} (kernel width {lag_width:.3e})",
            quad.t_step
        )));
    }
    // A trapezoid ω rule is periodic in the conjugate variable with period
    // 2π/Δω; every lag the t grid produces must sit well inside one period.
    let max_rate = 2.0 * quad.t_half_width / (lambda * lambda);
    let period = 2.0 * PI / quad.omega_step;
    if period - max_rate < COVERAGE_SIGMAS / rho.width {
        return Err(Error::Config(format!(
            "frequency step {} aliases the kernel at λ = {lambda}; need < {:.3e}",
            quad.omega_step,
            2.0 * PI / (max_rate + COVERAGE_SIGMAS / rho.width)
        )));
    }
    Ok(())
}

/// `I_λ` by trapezoidal product quadrature.
pub fn rescaled_pairing(
    lambda: f64,
    f: &TestFunction,
    g: &TestFunction,
    rho: &SpectralDensity,
    omega0: f64,
    quad: &Quadrature,
) -> Result<Complex64> {
    check_domains(lambda, f, g, rho, quad)?;
    let nt = intervals(quad.t_half_width, quad.t_step);
    let h = 2.0 * quad.t_half_width / nt as f64;
    let (ts, wt) = trapezoid_grid(-quad.t_half_width, h, nt);
    let nw = intervals(quad.omega_half_width, quad.omega_step);
    let dw = 2.0 * quad.omega_half_width / nw as f64;
    let (omegas, ww) = trapezoid_grid(rho.center - quad.omega_half_width, dw, nw);

    let fw: Vec<f64> = ts.iter().zip(&wt).map(|(&t, &w)| w * f.eval(t)).collect();
    let gw: Vec<f64> = ts.iter().zip(&wt).map(|(&t, &w)| w * g.eval(t)).collect();
    let shell = rho.shell(omega0);
    let spectral: Vec<(f64, f64)> = omegas
        .iter()
        .zip(&ww)
        .map(|(&om, &w)| (om - shell, w * rho.eval(om)))
        .collect();
    let inv_l2 = 1.0 / (lambda * lambda);

    // lag k ≥ 0 means t - t' = k·h; negative lags use the conjugate kernel
    let kernel = |k: usize| -> Complex64 {
        let rate = k as f64 * h * inv_l2;
        let mut acc = Complex64::new(0.0, 0.0);
        for &(detuning, weight) in &spectral {
            let phase = -rate * detuning;
            acc += weight * Complex64::new(phase.cos(), phase.sin());
        }
        acc * inv_l2
    };

    let n = ts.len();
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..n {
        // Σ_i f_i g_{i-k} for t - t' = +k h, and Σ_i f_{i-k}... for -k h
        let mut forward = 0.0;
        let mut backward = 0.0;
        for i in k..n {
            forward += fw[i] * gw[i - k];
            backward += fw[i - k] * gw[i];
        }
        if forward == 0.0 && backward == 0.0 {
            continue;
        }
        let kk = kernel(k);
        if k == 0 {
            total += kk * forward;
        } else {
            total += kk * forward + kk.conj() * backward;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub lambda: f64,
    pub re_value: f64,
    pub im_value: f64,
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub limit: f64,
    pub rows: Vec<ConvergenceRow>,
    /// At least three rows, strictly decreasing errors, and a final
    /// relative error below [`ConvergenceTable::TOLERANCE`].
    pub converged: bool,
}

impl ConvergenceTable {
    pub const TOLERANCE: f64 = 0.05;

    pub fn errors_strictly_decrease(&self) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].abs_error < w[0].abs_error)
    }

    pub fn final_relative_error(&self) -> f64 {
        let last = self
            .rows
            .last()
            .map(|r| r.abs_error)
            .unwrap_or(f64::INFINITY);
        if self.limit == 0.0 {
            last
        } else {
            last / self.limit.abs()
        }
    }
}

/// One row per coupling, in the order of `config.lambdas`.
pub fn convergence_table(
    config: &RescalingConfig,
    f: &TestFunction,
    g: &TestFunction,
    rho: &SpectralDensity,
) -> Result<ConvergenceTable> {
    let limit = white_noise_limit(f, g, rho, config.omega0);
    let values: Vec<Result<Complex64>> = config
        .lambdas
        .par_iter()
        .map(|&l| rescaled_pairing(l, f, g, rho, config.omega0, &config.quadrature))
        .collect();
    let mut rows = Vec::with_capacity(values.len());
    for (&lambda, value) in config.lambdas.iter().zip(values) {
        let value = value?;
        rows.push(ConvergenceRow {
            lambda,
            re_value: value.re,
            im_value: value.im,
            abs_error: (value - limit).norm(),
        });
    }
    let mut table = ConvergenceTable {
        limit,
        rows,
        converged: false,
    };
    table.converged = table.rows.len() >= 3
        && table.errors_strictly_decrease()
        && table.final_relative_error() < ConvergenceTable::TOLERANCE;
    Ok(table)
}

/// Regularized shell delta `δ(ω - ω₀)` per mode: a normalized Gaussian of
/// the given width evaluated at each grid frequency.
pub fn resonance_weight(mode_grid: &[f64], omega0: f64, width: f64) -> Result<Vec<f64>> {
    check_width(width)?;
    Ok(mode_grid
        .iter()
        .map(|&om| gaussian_kernel(om - omega0, width))
        .collect())
}

/// Two-dispersion shell `δ(ω(k) + ε(p) - ε(p+k))`, one `(ω(k), ε(p), ε(p+k))`
/// triple per mode.
pub fn resonance_weight_two_dispersion(modes: &[(f64, f64, f64)], width: f64) -> Result<Vec<f64>> {
    check_width(width)?;
    Ok(modes
        .iter()
        .map(|&(om, ep, epk)| gaussian_kernel(om + ep - epk, width))
        .collect())
}

fn check_width(width: f64) -> Result<()> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(format!(
            "resonance width must be > 0, got {width}"
        )));
    }
    Ok(())
}
