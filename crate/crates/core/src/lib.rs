//! Worst-case regret analysis for online Frank–Wolfe schemes.
//!
//! The crate is organised around the general projection-free scheme
//!
//! ```text
//! dir_t   = Σ_{s≤t} η_{t,s} g_s + Σ_{s<t} β_{t,s} (v_s − x_1)
//! v_t     = argmin_{v ∈ K} ⟨dir_t, v⟩
//! x_{t+1} = x_1 + Σ_{s≤t} γ_{t+1,s} (v_s − x_1)
//! ```
//!
//! - [`model`]: problem settings and coefficient schedules, with presets.
//! - [`simulate`]: replays schedules, OFW, FTRL and the multi-round scheme on
//!   concrete domains.
//! - [`bounds`]: closed-form regret bounds, potentials and the sum-of-squares
//!   certificate behind the tuned OFW analysis.
//! - [`pep`]: Gram-lifted performance-estimation programs (tight bounds, duals,
//!   joint parameter optimisation, one-step potential design).
//! - [`sdp`]: a dense primal-dual interior-point solver for those programs.
//! - [`witness`]: adversarial instances recovered from solved Gram matrices.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;

mod error;
pub mod linalg;
pub(crate) mod num;

pub mod bounds;
pub mod model;
pub mod pep;
pub mod sdp;
pub mod simulate;
pub mod witness;

pub use error::{Error, Result};
pub use model::{MultiRoundSchedule, ParamSchedule, ProblemSetting};
