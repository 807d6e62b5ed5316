//! Simulation engine for a coupled kelp-biomass / harvester-compliance /
//! price jump-diffusion system.
//!
//! * [`model`]: parameters and coefficient functions, assumption checks.
//! * [`noise`]: seeded per-component random streams and grid refinement.
//! * [`scheme`]: the exponential positivity-preserving scheme and reference steppers.
//! * [`ibm`]: exact simulation of the n-agent individual-based chain.
//! * [`analysis`]: ensembles, densities, extinction and Lyapunov diagnostics.
//! * [`convergence`]: strong-error and mean-field harnesses.
//! * [`config`], [`presets`], [`io`]: scenario files and tabular output.

pub mod analysis;
pub mod config;
pub mod convergence;
pub mod error;
pub mod ibm;
pub mod io;
pub mod model;
pub mod noise;
pub mod presets;
pub mod scheme;

pub use config::{InitSpec, RunConfig, ScenarioConfig};
pub use error::{Error, Result};
pub use model::{
    ComplianceParams, EcologicalParams, Gain, JumpParams, MarkAtom, MarkDist, ModelParams, Population, PriceKind,
    PriceParams, RateFamily, StateVec, ValidationReport,
};
pub use noise::{Component, JumpEvent, SeedSpec};
pub use scheme::{GridSpec, PathRecord, SchemeTag, SimOptions, Simulator};
