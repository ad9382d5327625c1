use rand::seq::index::sample;

use super::CMatrix;
use crate::rng::{complex_gaussian_matrix, seeded};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    pub devices: usize,
    pub antennas: usize,
    pub active: usize,
    pub pilot_length: usize,
    pub noise_sd: f64,
}

impl DetectionParams {
    pub fn validate(&self) -> Result<()> {
        if self.active > self.devices {
            return Err(Error::invalid(format!(
                "{} active devices out of {}",
                self.active, self.devices
            )));
        }
        if self.pilot_length == 0 || self.antennas == 0 {
            return Err(Error::invalid("pilot length and antenna count must be positive"));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::invalid("noise standard deviation must be finite and nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionInstance {
    pub params: DetectionParams,
    /// `N x L`, entries `CN(0, 1)`.
    pub pilots: CMatrix,
    /// `M x N` channels of every device, active or not.
    pub channels: CMatrix,
    /// Sorted active devices.
    pub support: Vec<usize>,
    /// `M x N`, the channels masked to the support.
    pub theta: CMatrix,
    /// `M x L`
    pub observation: CMatrix,
}

/// Draws the support, channels, pilots and noise from one seeded stream, in
/// that order.
pub fn generate_instance(params: DetectionParams, seed: u64) -> Result<DetectionInstance> {
    params.validate()?;
    let DetectionParams { devices: n, antennas: m, active: k, pilot_length: l, noise_sd } = params;
    let mut rng = seeded(seed);
    let mut support = sample(&mut rng, n, k).into_vec();
    support.sort_unstable();
    let channels = complex_gaussian_matrix(&mut rng, m, n, 1.0);
    let pilots = complex_gaussian_matrix(&mut rng, n, l, 1.0);
    let noise = complex_gaussian_matrix(&mut rng, m, l, noise_sd * noise_sd);
    let mut theta = CMatrix::from_element(m, n, C64::new(0.0, 0.0));
    for &j in &support {
        theta.set_column(j, &channels.column(j));
    }
    let observation = &theta * &pilots + noise;
    Ok(DetectionInstance { params, pilots, channels, support, theta, observation })
}
