//! Radiation patterns for uniform square antenna arrays.
//!
//! The full pattern is the product `G = G0 * Ge * Ga` of a 3GPP single-element
//! pattern `Ge`, a uniform-excitation array factor `Ga`, and a total-power
//! normalization constant `G0` chosen so that the pattern integrates to one
//! over the sphere. Alongside the exact pattern, the module provides the
//! closed-form main-lobe approximation `Gn * (1 - cos(N k d Θ)) / (N Θ)^2`
//! that the interference analysis is built on.
//!
//! All gains are linear; dB only appears at I/O boundaries. Angles follow two
//! conventions: spherical `(theta, phi)` with `theta` measured off boresight,
//! and the planar direction-angle pair `(theta_x, theta_y)` with
//! `tan(theta_x) = tan(theta) cos(phi)` and `tan(theta_y) = tan(theta) sin(phi)`.

use crate::{Error, Result};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Calibration constant of the main-lobe approximation (`G_n`).
pub const MAIN_LOBE_GAIN_CONSTANT: f64 = 3.1548;

/// 3GPP single-element pattern parameters. Defaults: 65 deg beamwidths,
/// 8 dBi peak, 30 dB front-back ratio and side-lobe limit.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElementPatternParams {
    pub vertical_3db_beamwidth_deg: f64,
    pub horizontal_3db_beamwidth_deg: f64,
    pub max_element_gain_dbi: f64,
    pub front_back_ratio_db: f64,
    pub side_lobe_limit_db: f64,
}

impl Default for ElementPatternParams {
    fn default() -> Self {
        Self {
            vertical_3db_beamwidth_deg: 65.0,
            horizontal_3db_beamwidth_deg: 65.0,
            max_element_gain_dbi: 8.0,
            front_back_ratio_db: 30.0,
            side_lobe_limit_db: 30.0,
        }
    }
}

impl ElementPatternParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.vertical_3db_beamwidth_deg,
            self.horizontal_3db_beamwidth_deg,
            self.max_element_gain_dbi,
            self.front_back_ratio_db,
            self.side_lobe_limit_db,
        ];
        if all.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config(
                "element pattern parameters must be finite and positive".into(),
            ));
        }
        Ok(())
    }
}

/// Uniform square array of `n x n` elements with half-wavelength default
/// spacing and no progressive phase shift.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ArrayConfig {
    pub n_elements_per_side: usize,
    /// Element spacing in wavelengths (`d_a`, default 0.5).
    pub element_spacing_wavelengths: f64,
    pub phase_shift_x_rad: f64,
    pub phase_shift_y_rad: f64,
    pub carrier_frequency_hz: f64,
    #[serde(skip)]
    normalization: OnceLock<f64>,
}

impl ArrayConfig {
    pub fn new(n_elements_per_side: usize, carrier_frequency_hz: f64) -> Result<Self> {
        let cfg = Self {
            n_elements_per_side,
            element_spacing_wavelengths: 0.5,
            phase_shift_x_rad: 0.0,
            phase_shift_y_rad: 0.0,
            carrier_frequency_hz,
            normalization: OnceLock::new(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_elements_per_side < 1 {
            return Err(Error::Config("array needs at least one element per side".into()));
        }
        if !(self.element_spacing_wavelengths > 0.0) {
            return Err(Error::Config("element spacing must be positive".into()));
        }
        if !(self.carrier_frequency_hz > 0.0) {
            return Err(Error::Config("carrier frequency must be positive".into()));
        }
        Ok(())
    }

    /// `k * d_a` — wave number times physical spacing. With spacing quoted in
    /// wavelengths this is `2 pi * d_a` and equals `pi` at the default.
    pub fn kd(&self) -> f64 {
        2.0 * PI * self.element_spacing_wavelengths
    }

    /// Cached total-power normalization constant `G0`.
    pub fn normalization(&self, params: &ElementPatternParams) -> Result<f64> {
        if let Some(v) = self.normalization.get() {
            return Ok(*v);
        }
        let g0 = normalization_constant(self, params)?;
        Ok(*self.normalization.get_or_init(|| g0))
    }
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite angle".into()));
    }
    Ok(())
}

/// 3GPP single-element gain in dB for direction angles in radians.
///
/// The tilt angle `theta_e = atan2(sqrt(1 + sin^2 theta_x), sin theta_y)` is
/// evaluated with the two-argument arctangent so the sign of `sin(theta_y)`
/// selects the quadrant; the printed one-argument form is ambiguous there.
/// Note the square-root numerator bounds `theta_e` to `90 +- 45` degrees at
/// `theta_x = 0`, which deviates from the plain 3GPP vertical cut.
fn element_gain_db(theta_x: f64, theta_y: f64, p: &ElementPatternParams) -> f64 {
    let theta_e_deg = (1.0 + theta_x.sin().powi(2))
        .sqrt()
        .atan2(theta_y.sin())
        .to_degrees();
    let vert = (12.0 * ((theta_e_deg - 90.0) / p.vertical_3db_beamwidth_deg).powi(2))
        .min(p.side_lobe_limit_db);
    let horiz = (12.0 * (theta_x.to_degrees() / p.horizontal_3db_beamwidth_deg).powi(2))
        .min(p.front_back_ratio_db);
    p.max_element_gain_dbi - (vert + horiz).min(p.front_back_ratio_db)
}

/// Linear single-element gain for direction angles `(theta_x, theta_y)`.
pub fn element_gain(theta_x: f64, theta_y: f64, params: &ElementPatternParams) -> Result<f64> {
    check_finite(&[theta_x, theta_y])?;
    Ok(10f64.powf(element_gain_db(theta_x, theta_y, params) / 10.0))
}

/// `(sin(n x / 2) / (n sin(x / 2)))^2` with the removable singularity at
/// `sin(x/2) = 0` replaced by its limit value 1.
fn dirichlet_sq(x: f64, n: f64) -> f64 {
    let s = (x / 2.0).sin();
    if s.abs() < 1e-12 {
        1.0
    } else {
        let r = (n * x / 2.0).sin() / (n * s);
        r * r
    }
}

/// Normalized array factor in `[0, 1]` at spherical direction `(theta, phi)`.
pub fn array_factor(theta: f64, phi: f64, cfg: &ArrayConfig) -> Result<f64> {
    check_finite(&[theta, phi])?;
    let n = cfg.n_elements_per_side as f64;
    let kd = cfg.kd();
    let ux = kd * theta.sin() * phi.cos() + cfg.phase_shift_x_rad;
    let uy = kd * theta.sin() * phi.sin() + cfg.phase_shift_y_rad;
    Ok(dirichlet_sq(ux, n) * dirichlet_sq(uy, n))
}

/// Direction angles of the spherical direction `(theta, phi)`:
/// `theta_x = atan2(v_x, v_z)`, `theta_y = atan2(v_y, v_z)` for the unit vector
/// `v = (sin t cos p, sin t sin p, cos t)`. Covers the back hemisphere.
pub fn spherical_to_direction_angles(theta: f64, phi: f64) -> (f64, f64) {
    let (st, ct) = (theta.sin(), theta.cos());
    ((st * phi.cos()).atan2(ct), (st * phi.sin()).atan2(ct))
}

/// Unnormalized pattern `Ge * Ga` at spherical direction `(theta, phi)`.
fn pattern_unnormalized(
    theta: f64,
    phi: f64,
    cfg: &ArrayConfig,
    params: &ElementPatternParams,
) -> f64 {
    let (tx, ty) = spherical_to_direction_angles(theta, phi);
    let ge = 10f64.powf(element_gain_db(tx, ty, params) / 10.0);
    let n = cfg.n_elements_per_side as f64;
    let kd = cfg.kd();
    let ux = kd * theta.sin() * phi.cos() + cfg.phase_shift_x_rad;
    let uy = kd * theta.sin() * phi.sin() + cfg.phase_shift_y_rad;
    ge * dirichlet_sq(ux, n) * dirichlet_sq(uy, n)
}

/// Tensor-product Simpson rule over the sphere for `f(theta, phi) sin(theta)`,
/// with `n_theta x n_phi` intervals (both even).
pub fn sphere_quadrature<F: Fn(f64, f64) -> f64>(f: &F, n_theta: usize, n_phi: usize) -> f64 {
    let ht = PI / n_theta as f64;
    let hp = 2.0 * PI / n_phi as f64;
    let simpson_w = |i: usize, n: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut total = 0.0;
    for i in 0..=n_theta {
        let theta = i as f64 * ht;
        let st = theta.sin();
        if st == 0.0 && (i == 0 || i == n_theta) {
            continue; // integrand vanishes at the poles
        }
        let wt = simpson_w(i, n_theta);
        let mut row = 0.0;
        for j in 0..=n_phi {
            row += simpson_w(j, n_phi) * f(theta, j as f64 * hp);
        }
        total += wt * row * st;
    }
    total * ht * hp / 9.0
}

/// Adaptive refinement of [`sphere_quadrature`]: doubles the grid until the
/// relative change drops below `tol`.
pub fn sphere_quadrature_adaptive<F: Fn(f64, f64) -> f64>(
    f: &F,
    tol: f64,
    start_theta: usize,
    start_phi: usize,
    max_doublings: usize,
) -> Result<f64> {
    let mut nt = start_theta;
    let mut np = start_phi;
    let mut prev = sphere_quadrature(f, nt, np);
    for _ in 0..max_doublings {
        nt *= 2;
        np *= 2;
        let cur = sphere_quadrature(f, nt, np);
        if (cur - prev).abs() <= tol * cur.abs() {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Numerical(format!(
        "sphere quadrature did not converge to {tol:.1e} within {max_doublings} refinements"
    )))
}

/// Total-power normalization constant `G0 = 1 / ∬ Ge Ga sin(theta) dtheta dphi`.
pub fn normalization_constant(cfg: &ArrayConfig, params: &ElementPatternParams) -> Result<f64> {
    cfg.validate()?;
    params.validate()?;
    let f = |theta: f64, phi: f64| pattern_unnormalized(theta, phi, cfg, params);
    let integral = sphere_quadrature_adaptive(&f, 1e-6, 256, 512, 6)?;
    if !(integral > 0.0) {
        return Err(Error::Numerical("pattern integral not positive".into()));
    }
    Ok(1.0 / integral)
}

/// Full normalized pattern `G = G0 * Ge * Ga` at spherical `(theta, phi)`.
pub fn full_gain(
    theta: f64,
    phi: f64,
    cfg: &ArrayConfig,
    params: &ElementPatternParams,
) -> Result<f64> {
    check_finite(&[theta, phi])?;
    let g0 = cfg.normalization(params)?;
    Ok(g0 * pattern_unnormalized(theta, phi, cfg, params))
}

/// Peak (boresight) gain of the normalized pattern; serves as `G_maxS` for a
/// transmit array.
pub fn peak_gain(cfg: &ArrayConfig, params: &ElementPatternParams) -> Result<f64> {
    full_gain(0.0, 0.0, cfg, params)
}

/// Radial misalignment angle `Θ = atan(sqrt(tan^2 dx + tan^2 dy))` of a pair
/// of direction-angle offsets.
pub fn misalignment_angle(dx: f64, dy: f64) -> f64 {
    (dx.tan().powi(2) + dy.tan().powi(2)).sqrt().atan()
}

/// Main-lobe shape factor `(1 - cos(n kd Θ)) / (n Θ)^2`, with the analytic
/// limit `kd^2 / 2` at `Θ = 0`. Evaluated as `2 sin^2(n kd Θ / 2)` to avoid
/// the cancellation of `1 - cos` at small arguments.
pub fn main_lobe_shape(big_theta: f64, n: f64, kd: f64) -> f64 {
    if big_theta.abs() < 1e-12 {
        kd * kd / 2.0
    } else {
        2.0 * (n * kd * big_theta / 2.0).sin().powi(2) / (n * big_theta).powi(2)
    }
}

/// Approximated receive-times-transmit gain product of the reference link:
/// `Gn * g_max_tx * (1 - cos(N' kd Θ)) / (N' Θ)^2` with
/// `Θ = atan(sqrt(tan^2 theta_x + tan^2 theta_y))`.
pub fn approx_main_lobe_gain(
    theta_x: f64,
    theta_y: f64,
    n_rx: usize,
    g_max_tx: f64,
    cfg: &ArrayConfig,
) -> Result<f64> {
    check_finite(&[theta_x, theta_y])?;
    let big = misalignment_angle(theta_x, theta_y);
    Ok(MAIN_LOBE_GAIN_CONSTANT * g_max_tx * main_lobe_shape(big, n_rx as f64, cfg.kd()))
}

/// First-null angle of the main-lobe approximation, `2 pi / (N' kd)`.
pub fn first_null_angle(n_rx: usize, kd: f64) -> f64 {
    2.0 * PI / (n_rx as f64 * kd)
}
