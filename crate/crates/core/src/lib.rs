//! Multi-armed bandits with symmetric alpha-stable rewards.
//!
//! The crate is organised bottom-up:
//!
//! * [`stable`] parameterises `S_alpha(beta, sigma, mu)`, draws exact variates with the
//!   Chambers-Mallows-Stuck transform and exposes the closed forms (characteristic
//!   function, closure under sums/scaling/averaging, absolute moments, tail asymptote).
//! * [`smin`] is the scale-mixture-of-normals machinery: a rejection sampler for the
//!   auxiliary mixing variable and the conjugate normal update in accumulator form.
//! * [`policy`] holds alpha-TS, Robust alpha-TS and the three baselines behind one
//!   interface.
//! * [`sim`] runs seeded, paired replications and aggregates regret traces.
//! * [`ks`] and [`diagnostics`] are the goodness-of-fit harness used both by tests and by
//!   the `validate` subcommand of the CLI.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod ks;
pub mod policy;
pub mod rng;
pub mod sim;
pub mod smin;
pub mod special;
pub mod stable;

pub use config::{AlphaGrid, ExperimentConfig, PolicySpec, PriorGrid, PriorMode};
pub use error::{Error, Result};
pub use ks::GoodnessOfFit;
pub use policy::{Agent, Policy, PolicyConfig, PolicyKind};
pub use rng::Stream;
pub use sim::{BanditInstance, BatchResult, RegretTrace};
pub use smin::{LambdaDraw, PosteriorState, SminModel};
pub use stable::{MomentSpec, StableParams};
