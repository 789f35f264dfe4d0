//! Fairness-aware influence maximization under independent-cascade
//! diffusion. The objective is the minimum group utility: the fraction of
//! a group expected to be reached, minimized over groups. Selection runs
//! in two steps: a per-group ranked seed matrix built with reverse
//! reachable sampling ([`igm`]), then an across-group sweep that spends
//! the shared budget on the matrix ([`agm`]). Group-blind and heuristic
//! selectors live in [`baselines`], Monte Carlo evaluation in
//! [`diffusion`] and [`metrics`], and exact small-graph references in
//! [`oracle`].

pub mod agm;
pub mod baselines;
pub mod diffusion;
pub mod error;
pub mod graph;
pub mod igm;
pub mod metrics;
pub mod oracle;
pub mod ris;
pub mod rng;
pub mod synth;

pub use agm::{agm_gs, agm_us, bound_report, AgmResult, BoundFloors, Strategy};
pub use baselines::{global_imm, myopic, naive_greedy, BaselineMethod, BaselineResult};
pub use diffusion::{estimate_group_utilities, estimate_sigma, SeedSet};
pub use error::{Error, Result};
pub use graph::{Graph, GroupStructure, NodeId};
pub use igm::{run_igm, IgmOutput, SeedMatrix};
pub use metrics::{evaluate, price_of_fairness, write_csv, EvalReport};
pub use oracle::ExactOracle;
pub use ris::ImmParams;
pub use synth::SynthSpec;
