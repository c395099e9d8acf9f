//! Large-scale channel effects: path loss, LoS probability, noise power.

use crate::{Error, Result};
use std::f64::consts::PI;

/// Boltzmann constant times the 290 K reference temperature, W/Hz.
pub const KB_T0: f64 = 1.380649e-23 * 290.0;

/// Channel-level parameters shared by every link.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams {
    pub carrier_frequency_hz: f64,
    /// Average building height of the deployment area, meters.
    pub building_height_m: f64,
    /// LoS-probability environment constants (alpha, beta).
    pub los_alpha: f64,
    pub los_beta: f64,
    /// Per-SBS transmit power, watts.
    pub tx_power_w: f64,
    /// Total bandwidth available to each UAV hub, Hz.
    pub total_bandwidth_hz: f64,
    /// Receiver noise figure applied to thermal noise, dB.
    pub noise_figure_db: f64,
    /// Explicit noise power override; when set it is used verbatim.
    pub noise_power_override_w: Option<f64>,
    /// SINR threshold, linear.
    pub sinr_threshold: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            carrier_frequency_hz: 60e9,
            building_height_m: 20.0,
            los_alpha: 9.61,
            los_beta: 0.16,
            tx_power_w: 1.0, // 30 dBm
            total_bandwidth_hz: 1e9,
            noise_figure_db: 10.0,
            noise_power_override_w: None,
            sinr_threshold: 10.0f64.powf(1.0), // 10 dB
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.carrier_frequency_hz,
            self.building_height_m,
            self.los_alpha,
            self.los_beta,
            self.tx_power_w,
            self.total_bandwidth_hz,
            self.sinr_threshold,
        ];
        if positive.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Config("channel parameters must be finite and positive".into()));
        }
        if self.los_alpha >= 100.0 {
            return Err(Error::Config("los_alpha out of range (0, 100)".into()));
        }
        if self.building_height_m > 150.0 {
            return Err(Error::Config("path-loss model valid for building heights up to 150 m".into()));
        }
        Ok(())
    }

    /// Noise power over `bandwidth_hz`, honoring the explicit override.
    pub fn noise_power(&self, bandwidth_hz: f64) -> f64 {
        match self.noise_power_override_w {
            Some(v) => v,
            None => noise_power(bandwidth_hz, self.noise_figure_db),
        }
    }
}

/// Path loss in dB for a link of `length_m` meters. Free-space term uses the
/// carrier in GHz; the three building-height terms follow the printed model.
pub fn path_loss_db(length_m: f64, params: &ChannelParams) -> Result<f64> {
    if !(length_m > 0.0) || !length_m.is_finite() {
        return Err(Error::InvalidArgument(format!("link length {length_m} must be positive")));
    }
    let fc_ghz = params.carrier_frequency_hz / 1e9;
    let hb = params.building_height_m;
    let free_space = -20.0 * (40.0 * PI * length_m * fc_ghz / 3.0).log10();
    let slope = (0.03 * hb.powf(1.73)).min(10.0) * length_m.log10();
    let offset = (0.044 * hb.powf(1.73)).min(14.77);
    let linear = -0.002 * length_m * hb.log10();
    Ok(free_space + slope + offset + linear)
}

/// Linear path-loss power gain `h_L` in `(0, 1]`.
pub fn path_loss(length_m: f64, params: &ChannelParams) -> Result<f64> {
    Ok(10f64.powf(path_loss_db(length_m, params)? / 10.0))
}

/// LoS probability as a function of elevation angle (radians):
/// `1 / (1 + alpha exp(-beta (180 elev / pi - alpha)))`.
pub fn los_probability(elevation_rad: f64, params: &ChannelParams) -> f64 {
    let deg = elevation_rad.to_degrees();
    1.0 / (1.0 + params.los_alpha * (-params.los_beta * (deg - params.los_alpha)).exp())
}

/// Thermal noise power `kB T0 B` raised by the noise figure.
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    KB_T0 * bandwidth_hz * 10f64.powf(noise_figure_db / 10.0)
}
