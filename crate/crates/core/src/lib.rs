//! Classical and quantum values of two-prover XOR games.
//!
//! * [`game`]: XOR and binary games, `⊕`, `∧`, convex combinations, transposes.
//! * [`classical`]: exact classical values by deterministic-strategy search.
//! * [`sdp`]: a small dense SDP solver with recomputed duality certificates.
//! * [`quantum`]: quantum biases, dual certificates and their tensor products.
//! * [`tsirelson`]: explicit entangled strategies from unit vectors.
//! * [`fl_relax`]: the two Feige–Lovász relaxations.
//! * [`simulate`]: a seeded Monte Carlo referee.

pub mod classical;
pub mod error;
pub mod fl_relax;
pub mod game;
pub mod io;
pub mod quantum;
pub mod sdp;
pub mod simulate;
pub mod tsirelson;

pub use error::{Error, Result};
