#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Downlink two-tier HetNet simulation and multi-agent tabular Q-learning
//! for distributed femtocell power allocation.
//!
//! The crate is `no_std` with `alloc`. File formats, parallel replicas and
//! the command line live in the companion `qdpa` crate.
//!
//! Module map:
//! - [`channel`]: dual-strip pathloss, link gains, noise, SINR and rates.
//! - [`topology`]: apartment-block geometry and the channel matrix.
//! - [`mdp`]: state variables, state-set models and the power action grid.
//! - [`reward`]: the odd-power reward and the comparison rewards.
//! - [`learning`]: Q-tables, learning rate, exploration, IL/CL targets.
//! - [`baselines`]: greedy powers, exhaustive search, value iteration.
//! - [`complexity`]: sample-complexity bound and iteration counts.
//! - [`protocol`]: incremental deployment and per-frame training loop.

extern crate alloc;

pub mod baselines;
pub mod channel;
pub mod complexity;
mod error;
pub mod learning;
mod math;
pub mod mdp;
pub mod protocol;
pub mod reward;
pub mod topology;

pub use crate::error::{Error, Result};

pub use crate::baselines::{ExplicitMdp, SolveResult};
pub use crate::channel::{ChannelMatrix, LinkKind, NoiseModel};
pub use crate::learning::{LearningConfig, LearningMode, QTable};
pub use crate::mdp::{ActionSet, AgentState, StateModel, StateSpace};
pub use crate::protocol::{Method, MetricsRecord, RunSpec};
pub use crate::reward::{RewardKind, RewardSpec};
pub use crate::topology::{Point, Scenario, ScenarioConfig};
