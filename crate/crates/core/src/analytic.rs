//! Closed-form machinery: Marcum Q, the Rician tilt-angle law, and the
//! discrete Dirac-atom SINR distribution with outage probability and ergodic
//! capacity.
//!
//! The random part of the frozen-interference SINR is the radial tilt angle
//! `Θ` of the victim antenna, approximately Rician with scale `sigma_theta`
//! and offset `mu_xy`. Partitioning `[0, theta_m]` into `M` sectors turns the
//! SINR law into a list of `(value, mass)` atoms: sector probabilities come
//! from first-order Marcum Q differences, sector values from the main-lobe
//! shape evaluated at the sector's lower edge. Mass beyond the truncation
//! angle is collapsed onto SINR 0.
//!
//! Two printed-formula defects are corrected by default (see
//! [`MassConvention`]): the peak-atom mass must be the complement
//! `1 - Q(mu/sigma, theta_m / (M sigma))` for the masses to form a
//! distribution, and the sector values need the `1/theta_m^2` factor that
//! makes them equal the underlying continuous SINR at the sector edges.
//! `MassConvention::PaperLiteral` reproduces the printed formulas verbatim
//! for documentation; its total mass exceeds 1.

use crate::antenna::MAIN_LOBE_GAIN_CONSTANT;
use crate::network::Scenario;
use crate::{Error, Result};
use std::path::Path;

// ---------------------------------------------------------------------------
// Modified Bessel function of the first kind, order zero
// ---------------------------------------------------------------------------

/// `I0(x)` via the all-positive power series; switches to the scaled
/// asymptotic form for large arguments.
pub fn besseli0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 20.0 {
        besseli0_series(ax)
    } else {
        besseli0_scaled(ax) * ax.exp()
    }
}

/// `e^{-|x|} I0(x)` — safe for arguments far beyond the overflow point of
/// `I0` itself.
pub fn besseli0_scaled(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 20.0 {
        besseli0_series(ax) * (-ax).exp()
    } else {
        // asymptotic series I0(x) ~ e^x / sqrt(2 pi x) * sum a_k / x^k,
        // a_k = ((2k-1)!!)^2 / (k! 8^k); truncated where terms stop shrinking
        let mut sum = 1.0;
        let mut term = 1.0;
        for k in 1..16 {
            let kf = k as f64;
            term *= (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (kf * 8.0 * ax);
            let next = sum + term;
            if next == sum {
                break;
            }
            sum = next;
        }
        sum / (2.0 * std::f64::consts::PI * ax).sqrt()
    }
}

fn besseli0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        let next = sum + term;
        if next == sum {
            break;
        }
        sum = next;
    }
    sum
}

// ---------------------------------------------------------------------------
// First-order Marcum Q-function
// ---------------------------------------------------------------------------

/// Numerical branch that produced a [`MarcumQ`] value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarcumMethod {
    /// Closed form `exp(-b^2/2)` for `a = 0`.
    RayleighTail,
    /// Poisson-weighted chi-square series.
    Series,
    /// Adaptive quadrature of the scaled integrand.
    Quadrature,
    /// Quadrature in the overflow region `a, b > 50`.
    AsymptoticQuadrature,
}

#[derive(Debug, Clone, Copy)]
pub struct MarcumQ {
    pub value: f64,
    pub method: MarcumMethod,
}

/// First-order Marcum Q-function `Q1(a, b) = ∫_b^∞ x e^{-(x²+a²)/2} I0(ax) dx`.
pub fn marcum_q(a: f64, b: f64) -> Result<f64> {
    Ok(marcum_q_detailed(a, b)?.value)
}

pub fn marcum_q_detailed(a: f64, b: f64) -> Result<MarcumQ> {
    if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
        return Err(Error::InvalidArgument(format!("marcum_q domain: a={a}, b={b}")));
    }
    if b == 0.0 {
        return Ok(MarcumQ { value: 1.0, method: MarcumMethod::RayleighTail });
    }
    if a == 0.0 {
        // Rayleigh tail; kept as a dedicated branch so the zero-offset atom
        // masses reduce bit-exactly to the exp-difference closed form.
        return Ok(MarcumQ { value: (-0.5 * b * b).exp(), method: MarcumMethod::RayleighTail });
    }
    if a <= 20.0 {
        Ok(MarcumQ { value: marcum_q_series(a, b), method: MarcumMethod::Series })
    } else {
        let method = if a > 50.0 && b > 50.0 {
            MarcumMethod::AsymptoticQuadrature
        } else {
            MarcumMethod::Quadrature
        };
        Ok(MarcumQ { value: marcum_q_quadrature(a, b), method })
    }
}

/// `Q1(a,b) = sum_k Poisson(k; a²/2) * P(chi²_{2k+2} > b²)` with both factors
/// advanced by stable upward recurrences. Truncation at relative 1e-12 via
/// the remaining Poisson mass.
fn marcum_q_series(a: f64, b: f64) -> f64 {
    let ha = 0.5 * a * a;
    let hb = 0.5 * b * b;
    let mut pois = (-ha).exp();
    let mut chi_term = (-hb).exp();
    let mut chi_tail = chi_term; // P(chi2_2 > b^2)
    let mut pois_cum = pois;
    let mut sum = pois * chi_tail;
    for k in 1..100_000 {
        let kf = k as f64;
        pois *= ha / kf;
        chi_term *= hb / kf;
        chi_tail += chi_term;
        sum += pois * chi_tail;
        pois_cum += pois;
        // remaining Poisson mass bounds the remaining contribution by itself
        if 1.0 - pois_cum <= 1e-14 + 1e-12 * sum {
            break;
        }
    }
    sum.min(1.0)
}

/// Adaptive Simpson quadrature of `x e^{-(x-a)²/2} Î0(ax)` on `[b, hi]`,
/// where `Î0` is the scaled Bessel function; the substitution keeps every
/// factor bounded for arbitrarily large `a`.
fn marcum_q_quadrature(a: f64, b: f64) -> f64 {
    let integrand = |x: f64| -> f64 {
        let e = -(x - a) * (x - a) / 2.0;
        x * e.exp() * besseli0_scaled(a * x)
    };
    let hi = (a + 14.0).max(b + 14.0);
    adaptive_simpson(&integrand, b, hi, 1e-13, 40).min(1.0)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: f64, depth: usize) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, m: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b))
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let left = simpson(f, a, 0.5 * (a + m), m);
        let right = simpson(f, m, 0.5 * (m + b), b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, m, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let m = 0.5 * (lo + hi);
    recurse(f, lo, hi, simpson(f, lo, m, hi), tol, depth)
}

// ---------------------------------------------------------------------------
// Vibration model and Rician tilt law
// ---------------------------------------------------------------------------

/// Gaussian orientation-fluctuation model of the victim antenna: the tilt
/// components are `N(mu_x, sigma²)` and `N(mu_y, sigma²)`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct VibrationModel {
    pub sigma_theta_rad: f64,
    pub mu_x_rad: f64,
    pub mu_y_rad: f64,
}

impl VibrationModel {
    pub fn new(sigma_theta_rad: f64, mu_x_rad: f64, mu_y_rad: f64) -> Result<Self> {
        if !(sigma_theta_rad > 0.0) || !sigma_theta_rad.is_finite() {
            return Err(Error::Config("sigma_theta must be positive".into()));
        }
        Ok(Self { sigma_theta_rad, mu_x_rad, mu_y_rad })
    }

    /// Radial mean offset `mu_xy = sqrt(mu_x² + mu_y²)`.
    pub fn mu_xy(&self) -> f64 {
        self.mu_x_rad.hypot(self.mu_y_rad)
    }
}

/// Rician density of the radial tilt angle:
/// `(θ/σ²) exp(-(θ²+μ²)/(2σ²)) I0(θμ/σ²)`, Rayleigh when `μ = 0`.
pub fn rician_angle_pdf(theta: f64, vib: &VibrationModel) -> f64 {
    if theta < 0.0 {
        return 0.0;
    }
    let s2 = vib.sigma_theta_rad * vib.sigma_theta_rad;
    let mu = vib.mu_xy();
    // exp(-(θ²+μ²)/2σ²) I0(θμ/σ²) = exp(-(θ-μ)²/2σ²) Î0(θμ/σ²)
    let scaled = (-(theta - mu) * (theta - mu) / (2.0 * s2)).exp() * besseli0_scaled(theta * mu / s2);
    theta / s2 * scaled
}

// ---------------------------------------------------------------------------
// Dirac-atom SINR distribution
// ---------------------------------------------------------------------------

/// Angular sectorization of the main lobe: `M` sectors over `[0, theta_m]`.
/// Suitable defaults are `M = 50` and `theta_m = 6 / N'`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SectorizationParams {
    pub n_sectors: usize,
    pub theta_max_rad: f64,
}

impl SectorizationParams {
    pub fn for_rx_array(n_rx: usize) -> Self {
        Self { n_sectors: 50, theta_max_rad: 6.0 / n_rx as f64 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sectors < 1 || !(self.theta_max_rad > 0.0) {
            return Err(Error::Config("sectorization needs M >= 1 and theta_m > 0".into()));
        }
        Ok(())
    }
}

/// Which printed-formula corrections to apply when building atoms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassConvention {
    /// Peak mass `1 - Q`, explicit zero-SINR residual, sector values scaled
    /// by `1/theta_m²` so they equal the continuous SINR at sector edges.
    Corrected,
    /// The formulas exactly as printed; total mass exceeds 1.
    PaperLiteral,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Atom {
    pub value: f64,
    pub mass: f64,
}

/// Discrete SINR distribution: atoms sorted by descending value, plus the
/// truncation-tail mass assigned to SINR 0.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SinrAtoms {
    pub atoms: Vec<Atom>,
    pub residual_zero_mass: f64,
}

impl SinrAtoms {
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>() + self.residual_zero_mass
    }

    /// `P(Γ <= x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut p = if x >= 0.0 { self.residual_zero_mass } else { 0.0 };
        for a in &self.atoms {
            if a.value <= x {
                p += a.mass;
            }
        }
        p
    }

    /// Tabular text format: one `value mass` pair per line, residual in the
    /// header. Values are linear SINR, descending.
    pub fn to_table(&self) -> String {
        let mut out = String::from("# sinr_atoms v1\n");
        out.push_str(&format!("# residual_zero_mass = {:e}\n", self.residual_zero_mass));
        for a in &self.atoms {
            out.push_str(&format!("{:e} {:e}\n", a.value, a.mass));
        }
        out
    }

    pub fn write_table(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_table())?;
        Ok(())
    }

    pub fn from_table(text: &str) -> Result<SinrAtoms> {
        let mut residual = None;
        let mut atoms = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some((k, v)) = rest.split_once('=') {
                    if k.trim() == "residual_zero_mass" {
                        residual = Some(v.trim().parse().map_err(|e| {
                            Error::Config(format!("bad residual in atom table: {e}"))
                        })?);
                    }
                }
                continue;
            }
            let mut parts = line.split_whitespace();
            let (v, m) = (parts.next(), parts.next());
            match (v, m) {
                (Some(v), Some(m)) => atoms.push(Atom {
                    value: v.parse().map_err(|e| Error::Config(format!("atom value: {e}")))?,
                    mass: m.parse().map_err(|e| Error::Config(format!("atom mass: {e}")))?,
                }),
                _ => return Err(Error::Config(format!("malformed atom row: {line}"))),
            }
        }
        Ok(SinrAtoms {
            atoms,
            residual_zero_mass: residual
                .ok_or_else(|| Error::Config("atom table missing residual header".into()))?,
        })
    }
}

/// Deterministic SINR aggregate of the mean geometry: the scale factor of
/// every atom value. Interference and noise enter through the bracket
/// `sum_j D_j sin²(N' kd Θ_j / 2)/Θ_j² + N'²σ²/2 + inter terms`, inverted and
/// scaled by the reference-link terms.
pub fn d1_aggregate(scenario: &Scenario, n_rx: usize) -> f64 {
    let n = n_rx as f64;
    let kd = scenario.kd;
    let mut bracket = n * n * scenario.noise_w / 2.0;
    for (p_hl, tx, ty) in scenario.intra_geometry() {
        let big = crate::antenna::misalignment_angle(tx, ty);
        bracket += p_hl * MAIN_LOBE_GAIN_CONSTANT * scenario.g_max_tx * half_sin_sq(big, n, kd);
    }
    for (p_hl, p_los, tx_shape, tx, ty) in scenario.inter_geometry() {
        let big = crate::antenna::misalignment_angle(tx, ty);
        // D_{i',j} sin²(N kd Θ'/2)/(N² Θ'²) * sin²(N' kd Θ/2)/Θ² with
        // D = 2 P h B P_LoS; the stored tx_shape is twice the first factor.
        bracket += p_hl * p_los * tx_shape * half_sin_sq(big, n, kd);
    }
    scenario.p_hl_signal * MAIN_LOBE_GAIN_CONSTANT * scenario.g_max_tx / bracket
}

fn half_sin_sq(big_theta: f64, n: f64, kd: f64) -> f64 {
    if big_theta.abs() < 1e-9 {
        (n * kd).powi(2) / 4.0
    } else {
        (n * kd * big_theta / 2.0).sin().powi(2) / (big_theta * big_theta)
    }
}

/// Build the Dirac-atom SINR distribution.
pub fn sinr_atoms(
    d1: f64,
    n_rx: usize,
    kd: f64,
    vib: &VibrationModel,
    sect: &SectorizationParams,
    convention: MassConvention,
) -> Result<SinrAtoms> {
    sect.validate()?;
    if !(d1 > 0.0) || !d1.is_finite() {
        return Err(Error::InvalidArgument(format!("d1 aggregate {d1} must be positive")));
    }
    let n = n_rx as f64;
    let m_sect = sect.n_sectors;
    let mf = m_sect as f64;
    let tm = sect.theta_max_rad;
    let sigma = vib.sigma_theta_rad;
    let a = vib.mu_xy() / sigma;

    // Q at the sector edges m = 1 ..= M+1
    let mut q = Vec::with_capacity(m_sect + 2);
    q.push(1.0); // edge 0
    for m in 1..=m_sect + 1 {
        q.push(marcum_q(a, m as f64 * tm / (mf * sigma))?);
    }

    let peak_value = d1 * (n * kd).powi(2) / 4.0;
    let mut atoms = Vec::with_capacity(m_sect + 1);
    match convention {
        MassConvention::Corrected => atoms.push(Atom { value: peak_value, mass: 1.0 - q[1] }),
        MassConvention::PaperLiteral => atoms.push(Atom { value: peak_value, mass: q[1] }),
    }
    for m in 1..=m_sect {
        let s2 = (n * kd * m as f64 * tm / (2.0 * mf)).sin().powi(2);
        let value = match convention {
            MassConvention::Corrected => d1 * mf * mf * s2 / ((m * m) as f64 * tm * tm),
            MassConvention::PaperLiteral => d1 * mf * mf * s2 / (m * m) as f64,
        };
        atoms.push(Atom { value, mass: q[m] - q[m + 1] });
    }
    let residual_zero_mass = match convention {
        MassConvention::Corrected => q[m_sect + 1],
        MassConvention::PaperLiteral => 0.0,
    };

    atoms.sort_by(|x, y| y.value.partial_cmp(&x.value).unwrap());
    let out = SinrAtoms { atoms, residual_zero_mass };
    if convention == MassConvention::Corrected {
        let total = out.total_mass();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Numerical(format!("atom masses sum to {total}, expected 1")));
        }
    }
    Ok(out)
}

/// `P(Γ < threshold)`: total mass of atoms strictly below the threshold,
/// including the zero-SINR residual.
pub fn outage_probability(atoms: &SinrAtoms, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidArgument("outage threshold must be positive".into()));
    }
    let mut p = atoms.residual_zero_mass;
    for a in &atoms.atoms {
        if a.value < threshold {
            p += a.mass;
        }
    }
    Ok(p)
}

/// Ergodic capacity `(R_u / N_SU) Σ mass log2(1 + value)` in bit/s/Hz, and
/// the absolute rate over the hub bandwidth.
pub fn ergodic_capacity(
    atoms: &SinrAtoms,
    reuse: usize,
    nsu: usize,
    total_bandwidth_hz: f64,
) -> (f64, f64) {
    let sum: f64 = atoms.atoms.iter().map(|a| a.mass * (1.0 + a.value).log2()).sum();
    let per_hz = reuse as f64 / nsu as f64 * sum;
    (per_hz, per_hz * total_bandwidth_hz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::{ArrayConfig, ElementPatternParams};
    use crate::geometry::{Topology, TopologySpec, Vec3};
    use crate::network::Scenario;
    use crate::propagation::ChannelParams;

    #[test]
    fn besseli0_reference_values() {
        let cases = [
            (0.5, 1.0634833707413235),
            (1.0, 1.2660658777520083),
            (5.0, 27.239871823604447),
            (19.0, 1.644619044061171e7),
            (20.0, 4.3558282559553534e7),
            (100.0, 1.0737517071310738e42),
        ];
        for (x, want) in cases {
            let got = besseli0(x);
            assert!((got / want - 1.0).abs() < 1e-12, "I0({x}): {got} vs {want}");
        }
        let scaled = [
            (1.0, 0.46575960759364044),
            (20.0, 0.08978031188482602),
            (200.0, 0.028227159949111916),
            (700.0, 0.015081295651531358),
        ];
        for (x, want) in scaled {
            let got = besseli0_scaled(x);
            assert!((got / want - 1.0).abs() < 1e-12, "I0e({x}): {got} vs {want}");
        }
    }

    #[test]
    fn marcum_q_golden_values() {
        // frozen from an independent high-precision quadrature of the
        // defining integral
        let cases = [
            (1.0, 2.0, 0.26901206003591),
            (0.5, 0.5, 0.8955085810698597),
            (3.0, 4.0, 0.19651218938840762),
            (10.0, 9.0, 0.8537790056770285),
            (10.0, 12.0, 0.025329474297941418),
            (5.0, 1.0, 0.99998720897638349),
            (0.1, 3.0, 0.011359729930736301),
            (25.0, 24.0, 0.84623456168252225),
            (25.0, 27.0, 0.023809375972288395),
            (55.0, 54.0, 0.8435546634717845),
        ];
        for (a, b, want) in cases {
            let got = marcum_q(a, b).unwrap();
            assert!((got - want).abs() < 1e-10, "Q({a},{b}): {got} vs {want}");
        }
    }

    #[test]
    fn marcum_q_limits_and_branches() {
        for a in [0.0, 0.3, 2.0, 30.0] {
            assert_eq!(marcum_q(a, 0.0).unwrap(), 1.0);
        }
        for b in [0.1, 1.0, 3.0] {
            let q = marcum_q(0.0, b).unwrap();
            assert_eq!(q.to_bits(), (-0.5f64 * b * b).exp().to_bits());
        }
        assert_eq!(marcum_q_detailed(10.0, 5.0).unwrap().method, MarcumMethod::Series);
        assert_eq!(marcum_q_detailed(30.0, 5.0).unwrap().method, MarcumMethod::Quadrature);
        assert_eq!(
            marcum_q_detailed(55.0, 54.0).unwrap().method,
            MarcumMethod::AsymptoticQuadrature
        );
        assert!(marcum_q(-1.0, 2.0).is_err());
        assert!(marcum_q(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn marcum_q_monotone_and_bounded() {
        for &a in &[0.0, 0.5, 1.5, 4.0, 12.0] {
            let mut prev = 1.0 + 1e-15;
            for k in 0..40 {
                let b = k as f64 * 0.5;
                let q = marcum_q(a, b).unwrap();
                assert!((0.0..=1.0).contains(&q));
                assert!(q <= prev + 1e-12, "a={a} b={b}");
                prev = q;
            }
        }
        for &b in &[0.5, 2.0, 6.0] {
            let mut prev = -1e-15;
            for k in 0..30 {
                let a = k as f64 * 0.5;
                let q = marcum_q(a, b).unwrap();
                assert!(q >= prev - 1e-11, "a={a} b={b}: {q} < {prev}");
                prev = q;
            }
        }
    }

    #[test]
    fn series_and_quadrature_branches_agree() {
        for (a, b) in [(18.0, 16.0), (19.9, 21.0), (15.0, 15.0)] {
            let s = marcum_q_series(a, b);
            let q = marcum_q_quadrature(a, b);
            assert!((s - q).abs() < 1e-10, "({a},{b}): {s} vs {q}");
        }
    }

    #[test]
    fn rician_pdf_rayleigh_reduction() {
        let vib = VibrationModel::new(0.03, 0.0, 0.0).unwrap();
        // normalization over [0, 20 sigma] by Simpson
        let hi = 20.0 * vib.sigma_theta_rad;
        let n = 20_000;
        let h = hi / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * rician_angle_pdf(i as f64 * h, &vib);
        }
        integral *= h / 3.0;
        assert!((integral - 1.0).abs() < 1e-6, "{integral}");
        // mode at sigma
        let at_mode = rician_angle_pdf(vib.sigma_theta_rad, &vib);
        assert!(at_mode > rician_angle_pdf(vib.sigma_theta_rad * 0.9, &vib));
        assert!(at_mode > rician_angle_pdf(vib.sigma_theta_rad * 1.1, &vib));
    }

    #[test]
    fn rician_tail_mass_equals_marcum_q() {
        let vib = VibrationModel::new(0.03, 0.012, -0.009).unwrap();
        let b = 0.05;
        // quadrature of the density over [b, 30 sigma]
        let hi = 30.0 * vib.sigma_theta_rad;
        let n = 40_000;
        let h = (hi - b) / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            integral += w * rician_angle_pdf(b + i as f64 * h, &vib);
        }
        integral *= h / 3.0;
        let q = marcum_q(vib.mu_xy() / vib.sigma_theta_rad, b / vib.sigma_theta_rad).unwrap();
        assert!((integral - q).abs() < 1e-8, "{integral} vs {q}");
    }

    fn scenario(reuse: usize, seed: u64) -> Scenario {
        let topo = Topology::generate(&TopologySpec::default(), seed).unwrap();
        let channel = ChannelParams::default();
        let tx = ArrayConfig::new(18, channel.carrier_frequency_hz).unwrap();
        Scenario::build(&topo, &channel, &tx, &ElementPatternParams::default(), reuse).unwrap()
    }

    fn single_sector_scenario() -> Scenario {
        let spec = TopologySpec {
            area_side_m: 1000.0,
            sector_side_m: 1000.0,
            sbs_per_sector: 4,
            ..TopologySpec::default()
        };
        let topo = Topology {
            spec,
            rng_seed: 0,
            n_sectors: 1,
            uav_positions: vec![Vec3::new(500.0, 500.0, 120.0)],
            sbs_positions: vec![vec![
                Vec3::new(500.0, 900.0, 0.0),
                Vec3::new(900.0, 500.0, 0.0),
                Vec3::new(500.0, 100.0, 0.0),
                Vec3::new(100.0, 500.0, 0.0),
            ]],
        };
        let channel = ChannelParams::default();
        let tx = ArrayConfig::new(18, channel.carrier_frequency_hz).unwrap();
        Scenario::build(&topo, &channel, &tx, &ElementPatternParams::default(), 1).unwrap()
    }

    #[test]
    fn d1_degenerate_case_is_noise_only() {
        let sc = single_sector_scenario();
        let d1 = d1_aggregate(&sc, 10);
        let expected = 2.0 * sc.p_hl_signal * MAIN_LOBE_GAIN_CONSTANT * sc.g_max_tx
            / (100.0 * sc.noise_w);
        assert!((d1 / expected - 1.0).abs() < 1e-12);
    }

    #[test]
    fn d1_decreases_with_interference_and_noise() {
        let sc1 = scenario(1, 42);
        let sc3 = scenario(3, 42);
        assert!(d1_aggregate(&sc3, 10) < d1_aggregate(&sc1, 10));

        let topo = Topology::generate(&TopologySpec::default(), 42).unwrap();
        let tx = ArrayConfig::new(18, 60e9).unwrap();
        let quiet = ChannelParams::default();
        let loud = ChannelParams { noise_power_override_w: Some(1e-6), ..quiet.clone() };
        let el = ElementPatternParams::default();
        let a = Scenario::build(&topo, &quiet, &tx, &el, 3).unwrap();
        let b = Scenario::build(&topo, &loud, &tx, &el, 3).unwrap();
        assert!(d1_aggregate(&b, 10) < d1_aggregate(&a, 10));
    }

    #[test]
    fn peak_atom_equals_zero_tilt_frozen_sinr() {
        // cross-module consistency: D1 (N' kd)^2 / 4 is exactly the SINR at
        // zero tilt with the denominator frozen at mean angles
        for (n_rx, reuse) in [(9usize, 3usize), (16, 3), (10, 12)] {
            let sc = scenario(reuse, 42);
            let d1 = d1_aggregate(&sc, n_rx);
            let peak = d1 * (n_rx as f64 * sc.kd).powi(2) / 4.0;
            let den = sc.frozen_denominator(n_rx);
            let direct = sc.frozen_sinr(n_rx, den, 0.0, 0.0);
            assert!((peak / direct - 1.0).abs() < 1e-12, "N'={n_rx} Ru={reuse}");
        }
    }

    #[test]
    fn atoms_partition_unity() {
        let vib = VibrationModel::new(2f64.to_radians(), 0.0, 0.0).unwrap();
        for (m, n_rx) in [(1usize, 10usize), (50, 9), (50, 16), (200, 12)] {
            let sect = SectorizationParams { n_sectors: m, ..SectorizationParams::for_rx_array(n_rx) };
            let atoms = sinr_atoms(1.0, n_rx, std::f64::consts::PI, &vib, &sect,
                MassConvention::Corrected).unwrap();
            assert!((atoms.total_mass() - 1.0).abs() < 1e-9);
            assert_eq!(atoms.atoms.len(), m + 1);
            // sorted descending, all masses and values non-negative
            for w in atoms.atoms.windows(2) {
                assert!(w[0].value >= w[1].value);
            }
            for a in &atoms.atoms {
                assert!(a.mass >= 0.0 && a.value >= 0.0);
            }
        }
    }

    #[test]
    fn vanishing_sigma_concentrates_on_peak() {
        let vib = VibrationModel::new(1e-4, 0.0, 0.0).unwrap();
        let sect = SectorizationParams::for_rx_array(10);
        let atoms =
            sinr_atoms(1.0, 10, std::f64::consts::PI, &vib, &sect, MassConvention::Corrected)
                .unwrap();
        let peak = atoms.atoms.iter().cloned().fold(Atom { value: 0.0, mass: 0.0 }, |acc, a| {
            if a.value > acc.value { a } else { acc }
        });
        assert!(peak.mass > 1.0 - 1e-12);
    }

    #[test]
    fn paper_literal_mass_exceeds_one() {
        let vib = VibrationModel::new(3f64.to_radians(), 0.0, 0.0).unwrap();
        let sect = SectorizationParams::for_rx_array(9);
        let atoms = sinr_atoms(1.0, 9, std::f64::consts::PI, &vib, &sect,
            MassConvention::PaperLiteral).unwrap();
        assert!(atoms.total_mass() > 1.0, "printed mass {}", atoms.total_mass());
    }

    #[test]
    fn zero_offset_masses_reduce_to_exp_differences() {
        // Lemma-level consistency: with mu = 0 every Marcum Q becomes the
        // Rayleigh tail, so the sector masses must equal the exp-difference
        // closed form bit for bit.
        let n_rx = 10usize;
        let vib = VibrationModel::new(2f64.to_radians(), 0.0, 0.0).unwrap();
        let sect = SectorizationParams::for_rx_array(n_rx);
        let d1 = 3.7;
        let kd = std::f64::consts::PI;
        let atoms = sinr_atoms(d1, n_rx, kd, &vib, &sect, MassConvention::Corrected).unwrap();

        let n = n_rx as f64;
        let mf = sect.n_sectors as f64;
        let tm = sect.theta_max_rad;
        let sigma = vib.sigma_theta_rad;
        let edge = |m: usize| m as f64 * tm / (mf * sigma);
        let tail = |m: usize| (-0.5 * edge(m) * edge(m)).exp();
        let mut expected = Vec::new();
        expected.push(Atom { value: d1 * (n * kd).powi(2) / 4.0, mass: 1.0 - tail(1) });
        for m in 1..=sect.n_sectors {
            let s2 = (n * kd * m as f64 * tm / (2.0 * mf)).sin().powi(2);
            expected.push(Atom {
                value: d1 * mf * mf * s2 / ((m * m) as f64 * tm * tm),
                mass: tail(m) - tail(m + 1),
            });
        }
        expected.sort_by(|x, y| y.value.partial_cmp(&x.value).unwrap());
        assert_eq!(atoms.atoms.len(), expected.len());
        for (got, want) in atoms.atoms.iter().zip(&expected) {
            assert_eq!(got.value.to_bits(), want.value.to_bits());
            assert_eq!(got.mass.to_bits(), want.mass.to_bits());
        }
        assert_eq!(
            atoms.residual_zero_mass.to_bits(),
            tail(sect.n_sectors + 1).to_bits()
        );
    }

    #[test]
    fn outage_edge_cases() {
        let vib = VibrationModel::new(2f64.to_radians(), 0.0, 0.0).unwrap();
        let sect = SectorizationParams::for_rx_array(10);
        let atoms =
            sinr_atoms(1.0, 10, std::f64::consts::PI, &vib, &sect, MassConvention::Corrected)
                .unwrap();
        let peak = atoms.atoms[0].value;
        assert!((outage_probability(&atoms, peak * 1.01).unwrap() - 1.0).abs() < 1e-12);
        let tiny = outage_probability(&atoms, 1e-300).unwrap();
        assert_eq!(tiny, atoms.residual_zero_mass);
        assert!(outage_probability(&atoms, 0.0).is_err());
    }

    #[test]
    fn outage_monotone_in_threshold_and_d1() {
        let vib = VibrationModel::new(2f64.to_radians(), 0.0, 0.0).unwrap();
        let sect = SectorizationParams::for_rx_array(10);
        let kd = std::f64::consts::PI;
        let a1 = sinr_atoms(1.0, 10, kd, &vib, &sect, MassConvention::Corrected).unwrap();
        let a2 = sinr_atoms(2.0, 10, kd, &vib, &sect, MassConvention::Corrected).unwrap();
        let mut prev = 0.0;
        for th in [0.1, 1.0, 10.0, 100.0, 1000.0] {
            let p = outage_probability(&a1, th).unwrap();
            assert!(p >= prev);
            prev = p;
            // larger D1 shifts every value up: outage can only drop
            assert!(outage_probability(&a2, th).unwrap() <= p + 1e-15);
        }
    }

    #[test]
    fn capacity_basics_and_mass_transfer() {
        let single = SinrAtoms {
            atoms: vec![Atom { value: 1.0, mass: 1.0 }],
            residual_zero_mass: 0.0,
        };
        let (per_hz, abs) = ergodic_capacity(&single, 12, 12, 1e9);
        assert!((per_hz - 1.0).abs() < 1e-15);
        assert!((abs - 1e9).abs() < 1.0);

        let low = SinrAtoms {
            atoms: vec![Atom { value: 10.0, mass: 0.3 }, Atom { value: 1.0, mass: 0.7 }],
            residual_zero_mass: 0.0,
        };
        let high = SinrAtoms {
            atoms: vec![Atom { value: 10.0, mass: 0.5 }, Atom { value: 1.0, mass: 0.5 }],
            residual_zero_mass: 0.0,
        };
        assert!(ergodic_capacity(&high, 3, 12, 1e9).0 > ergodic_capacity(&low, 3, 12, 1e9).0);
    }

    #[test]
    fn capacity_converges_in_sector_count() {
        for (n_rx, sigma_deg, reuse) in [(9usize, 3.0, 3usize), (10, 2.0, 3), (10, 2.0, 12)] {
            let sc = scenario(reuse, 42);
            let d1 = d1_aggregate(&sc, n_rx);
            let vib = VibrationModel::new((sigma_deg as f64).to_radians(), 0.0, 0.0).unwrap();
            let coarse = SectorizationParams::for_rx_array(n_rx);
            let fine = SectorizationParams { n_sectors: 200, ..coarse };
            let ca = ergodic_capacity(
                &sinr_atoms(d1, n_rx, sc.kd, &vib, &coarse, MassConvention::Corrected).unwrap(),
                reuse, sc.nsu, 1e9).0;
            let cf = ergodic_capacity(
                &sinr_atoms(d1, n_rx, sc.kd, &vib, &fine, MassConvention::Corrected).unwrap(),
                reuse, sc.nsu, 1e9).0;
            assert!((ca / cf - 1.0).abs() < 0.01, "M=50 {ca} vs M=200 {cf}");
        }
    }

    #[test]
    fn atom_table_roundtrip() {
        let vib = VibrationModel::new(2f64.to_radians(), 0.001, 0.002).unwrap();
        let sect = SectorizationParams::for_rx_array(12);
        let atoms =
            sinr_atoms(0.8, 12, std::f64::consts::PI, &vib, &sect, MassConvention::Corrected)
                .unwrap();
        let text = atoms.to_table();
        let back = SinrAtoms::from_table(&text).unwrap();
        assert_eq!(atoms.atoms.len(), back.atoms.len());
        for (a, b) in atoms.atoms.iter().zip(&back.atoms) {
            assert_eq!(a.value.to_bits(), b.value.to_bits());
            assert_eq!(a.mass.to_bits(), b.mass.to_bits());
        }
        assert_eq!(atoms.residual_zero_mass.to_bits(), back.residual_zero_mass.to_bits());
    }
}
