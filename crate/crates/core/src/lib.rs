//! Constructive Rényi entropy-rate maximization at desk scale.
//!
//! The crate builds, and numerically checks, processes whose Rényi rate
//! approaches the largest value allowed by a marginal cost constraint or by
//! a prefix of prescribed autocovariances:
//!
//! - [`density`]: grid densities, Rényi/Shannon entropies, cost moments, KL.
//! - [`maxent`]: the exponential-family maximizer behind `h*(Γ)`.
//! - [`truncation`]: bounding and domain restriction of densities.
//! - [`typicality`]: weakly typical ∩ cost-typical sets and uniform laws on them.
//! - [`mixtures`]: Rényi entropy of mixtures and its sandwich bounds.
//! - [`block`] / [`stationarize`]: block laws, random-shift stationarization
//!   and the window entropy bounds.
//! - [`burg`]: Levinson-Durbin, spectral initialization, AR simulation and the
//!   Rényi-rate sandwich.
//! - [`suite`]: the desk-scale verification suite used by `verify-all`.
//!
//! All entropies are in nats.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod block;
pub mod burg;
pub mod density;
pub mod error;
pub mod exec;
pub mod maxent;
pub mod mixtures;
pub mod numeric;
pub mod random;
pub mod rng;
pub mod serde_ext;
pub mod stationarize;
pub mod suite;
pub mod truncation;
pub mod typicality;

pub use error::{Error, Result};
pub use exec::ExecPolicy;
