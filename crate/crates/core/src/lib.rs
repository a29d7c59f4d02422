//! Numerics for a scalar plant stabilized over a finite-blocklength AWGN
//! link with a zooming quantizer.
//!
//! The crate covers the channel normal approximation ([`channel`]),
//! stability regions in the blocklength/rate plane ([`stability`]), the
//! quantizer and its range chain ([`quantizer`]), the plant and control law
//! ([`plant`]), analytical cost bounds ([`cost`]), Monte Carlo estimation of
//! the closed-loop cost ([`sim`]), grid optimization of the operating point
//! ([`optimize`]) and the scenario files and report writers behind the
//! `wncs` binary ([`scenario`], [`report`]).

pub mod channel;
pub mod cost;
pub mod error;
mod logspace;
pub mod optimize;
pub mod plant;
pub mod quantizer;
pub mod report;
pub mod scenario;
pub mod sim;
pub mod stability;

pub use channel::{ChannelParams, CodePoint};
pub use cost::{Bound, CostBounds};
pub use error::{Error, Result};
pub use plant::{DisturbanceLaw, PlantParams};
pub use quantizer::{QuantizerConfig, QuantizerState, ZoomParams};
pub use optimize::OptimizationResult;
pub use scenario::Scenario;
pub use sim::{SimConfig, SimResult};
pub use stability::{BoundScheme, GridAxes, RegionGrid, Scheme};
