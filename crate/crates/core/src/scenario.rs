//! TOML scenario files: one file fixes every input of a report.
//!
//! ```toml
//! name = "operating-point"
//! snr_db = 3.0
//! seed = 7
//!
//! [plant]
//! a = 1.01
//! b = 1.0
//! sigma_w_sq = 1e-10
//!
//! [quantizer]
//! xi0 = 1e5
//! scale_l = 100.0
//!
//! [grid]
//! n_max = 300
//!
//! [sweep]
//! rate = 0.19
//!
//! [sim]
//! n = 100
//! rate = 0.19
//! trials = 20
//! ```
//!
//! Omitted keys take the defaults of the section types below.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::ChannelParams;
use crate::error::{Error, Result};
use crate::plant::{DisturbanceLaw, PlantParams};
use crate::quantizer::ZoomParams;
use crate::sim::SimConfig;
use crate::stability::GridAxes;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub a: f64,
    #[serde(default = "one")]
    pub b: f64,
    pub sigma_w_sq: f64,
    #[serde(default = "one")]
    pub x0_max: f64,
    #[serde(default)]
    pub disturbance: DisturbanceLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerSection {
    pub xi0: f64,
    /// Zoom factor; when absent each code uses the midpoint of its
    /// admissible interval.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_l: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n_min: u32,
    pub n_max: u32,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            n_min: 1,
            n_max: 1000,
            r_min: 0.05,
            r_max: 3.5,
            r_step: 0.01,
        }
    }
}

/// Fixed coordinates of the one-dimensional cost sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Blocklength held fixed while `R` varies.
    pub n: u32,
    /// Rate held fixed while `n` varies.
    pub rate: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { n: 120, rate: 0.19 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub n: u32,
    pub rate: f64,
    pub horizon_blocks: u64,
    pub trials: u32,
    /// Defaults to 10% of the horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in_blocks: Option<u64>,
    /// Replaces the channel-derived error probability.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub exact_commands: bool,
    pub strict: bool,
}

impl Default for SimSection {
    fn default() -> Self {
        Self {
            n: 100,
            rate: 0.19,
            horizon_blocks: 20_000,
            trials: 100,
            burn_in_blocks: None,
            epsilon: None,
            exact_commands: false,
            strict: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub snr_db: f64,
    #[serde(default)]
    pub seed: u64,
    pub plant: PlantSection,
    pub quantizer: QuantizerSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub sim: SimSection,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        s.check()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario fields are all representable")
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Validate every section.
    pub fn check(&self) -> Result<()> {
        self.plant()?;
        self.channel()?;
        self.axes()?;
        if !(self.quantizer.xi0 > 0.0 && self.quantizer.xi0.is_finite()) {
            return Err(Error::domain("base range xi0", self.quantizer.xi0));
        }
        if let Some(l) = self.quantizer.scale_l {
            if !(l > 1.0 && l.is_finite()) {
                return Err(Error::domain("zoom factor L", l));
            }
        }
        if self.sweep.n == 0 || !(self.sweep.rate > 0.0) {
            return Err(Error::Config("sweep n and rate must be positive".into()));
        }
        if self.sim.n == 0 || !(self.sim.rate > 0.0) {
            return Err(Error::Config("sim n and rate must be positive".into()));
        }
        Ok(())
    }

    pub fn plant(&self) -> Result<PlantParams> {
        let p = &self.plant;
        PlantParams::new(p.a, p.b, p.sigma_w_sq, p.x0_max, p.disturbance)
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::from_db(self.snr_db)
    }

    pub fn axes(&self) -> Result<GridAxes> {
        let g = &self.grid;
        GridAxes::uniform(g.n_min, g.n_max, g.r_min, g.r_max, g.r_step)
    }

    /// Zoom parameters for the code `(n, rate)`: the configured `L`, or
    /// the midpoint of that code's admissible interval.
    pub fn zoom_for(&self, n: u32, rate: f64) -> Result<ZoomParams> {
        let scale_l = match self.quantizer.scale_l {
            Some(l) => l,
            None => crate::quantizer::select_scaling(n, rate, self.plant.a, None)?,
        };
        Ok(ZoomParams {
            xi0: self.quantizer.xi0,
            scale_l,
        })
    }

    /// Simulation at `(n, rate)` with the `[sim]` run settings.
    pub fn sim_config_at(&self, n: u32, rate: f64) -> Result<SimConfig> {
        let mut cfg = SimConfig::for_code(
            self.plant()?,
            self.channel()?,
            n,
            rate,
            self.quantizer.xi0,
            self.quantizer.scale_l,
        )?
        .with_horizon(self.sim.horizon_blocks);
        if let Some(b) = self.sim.burn_in_blocks {
            cfg.burn_in_blocks = b;
        }
        if let Some(e) = self.sim.epsilon {
            cfg = cfg.with_epsilon(e)?;
        }
        cfg.trials = self.sim.trials;
        cfg.seed = self.seed;
        cfg.exact_commands = self.sim.exact_commands;
        cfg.strict = self.sim.strict;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        self.sim_config_at(self.sim.n, self.sim.rate)
    }
}
