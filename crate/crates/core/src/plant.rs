//! Scalar plant `x' = a x + b u + w` and the block-synchronous control law.
//!
//! Commands are formed only at block boundaries `t = k n`. The controller
//! predicts the state one block ahead assuming no actuation in between and
//! sends `-(a/b)` times that prediction; the actuator applies a command only
//! in the slot where its codeword was decoded and holds zero otherwise.

use serde::{Deserialize, Serialize};

use crate::channel::q_function;
use crate::error::{Error, Result};
use crate::quantizer::geometric_gain;

/// Distribution of the i.i.d. plant disturbance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum DisturbanceLaw {
    /// Uniform on `(-w_max, w_max)` with `w_max = sqrt(3 sigma^2)`.
    #[default]
    Uniform,
    /// Gaussian truncated at `k` of its own standard deviations, rescaled so
    /// the truncated law has variance `sigma^2`.
    TruncatedGaussian { k: f64 },
}

impl DisturbanceLaw {
    /// Standard deviation of the untruncated parent Gaussian per unit of
    /// target standard deviation.
    pub(crate) fn gaussian_scale(k: f64) -> f64 {
        let phi = (-0.5 * k * k).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mass = 1.0 - 2.0 * q_function(k);
        let var_ratio = 1.0 - 2.0 * k * phi / mass;
        1.0 / var_ratio.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams {
    pub a: f64,
    pub b: f64,
    pub sigma_w_sq: f64,
    /// Initial state support half-width.
    pub x0_max: f64,
    #[serde(default)]
    pub disturbance: DisturbanceLaw,
}

impl PlantParams {
    pub fn new(a: f64, b: f64, sigma_w_sq: f64, x0_max: f64, disturbance: DisturbanceLaw) -> Result<Self> {
        if !(a.is_finite() && a.abs() > 1.0) {
            return Err(Error::domain("plant coefficient |a| (open-loop unstable plant required)", a));
        }
        if !(b.is_finite() && b != 0.0) {
            return Err(Error::domain("input coefficient b", b));
        }
        if !(sigma_w_sq >= 0.0 && sigma_w_sq.is_finite()) {
            return Err(Error::domain("disturbance variance", sigma_w_sq));
        }
        if !(x0_max > 0.0 && x0_max.is_finite()) {
            return Err(Error::domain("initial state support", x0_max));
        }
        if let DisturbanceLaw::TruncatedGaussian { k } = disturbance {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::domain("truncation point k", k));
            }
        }
        Ok(Self {
            a,
            b,
            sigma_w_sq,
            x0_max,
            disturbance,
        })
    }

    pub fn uniform(a: f64, b: f64, sigma_w_sq: f64, x0_max: f64) -> Result<Self> {
        Self::new(a, b, sigma_w_sq, x0_max, DisturbanceLaw::Uniform)
    }

    /// Disturbance support half-width implied by the law and variance.
    pub fn w_max(&self) -> f64 {
        let sigma = self.sigma_w_sq.sqrt();
        match self.disturbance {
            DisturbanceLaw::Uniform => (3.0 * self.sigma_w_sq).sqrt(),
            DisturbanceLaw::TruncatedGaussian { k } => k * sigma * DisturbanceLaw::gaussian_scale(k),
        }
    }

    /// Bound on the disturbance accumulated over one block,
    /// `w_max (a^n - 1) / (a - 1)`.
    pub fn omega_max(&self, n: u32) -> f64 {
        self.w_max() * geometric_gain(self.a, n)
    }
}

/// `a x + b u + w`.
pub fn plant_step(x: f64, u: f64, w: f64, plant: &PlantParams) -> f64 {
    plant.a * x + plant.b * u + w
}

/// One-block-ahead prediction `a^(n-1) (a x_t + s_t b u_t)`.
pub fn predict_state(x_t: f64, u_t: f64, decode_ok: bool, n: u32, plant: &PlantParams) -> f64 {
    let next = if decode_ok {
        plant.a * x_t + plant.b * u_t
    } else {
        plant.a * x_t
    };
    plant.a.powi(n as i32 - 1) * next
}

/// Pre-quantization command `-(a/b) * predict_state(..)`.
pub fn control_command(x_t: f64, u_t: f64, decode_ok: bool, n: u32, plant: &PlantParams) -> f64 {
    -(plant.a / plant.b) * predict_state(x_t, u_t, decode_ok, n, plant)
}

/// Zero-hold actuator.
pub fn actuator_action(command_midpoint: f64, decode_ok: bool, at_block_boundary: bool) -> f64 {
    if decode_ok && at_block_boundary {
        command_midpoint
    } else {
        0.0
    }
}

/// Blocks elapsed since the last successful decode.
pub fn pattern_update(pattern: u32, decode_ok: bool) -> u32 {
    if decode_ok {
        0
    } else {
        pattern + 1
    }
}

/// `Psi_j = (1 - eps) eps^j` for `j = 0..=j_max`.
pub fn pattern_stationary_distribution(epsilon: f64, j_max: u32) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(Error::domain("epsilon", epsilon));
    }
    Ok((0..=j_max)
        .map(|j| (1.0 - epsilon) * epsilon.powi(j as i32))
        .collect())
}

/// Trial-local closed-loop state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LoopState {
    pub x: f64,
    /// Prediction of the state at the next block boundary.
    pub x_hat: f64,
    /// Last applied action.
    pub u: f64,
    pub t: u64,
    pub pattern: u32,
}
