//! Coded caching with uncoded prefetching.
//!
//! The crate implements the exact-optimal caching schemes on real bit arrays
//! and the analysis layer around them:
//!
//! - [`centralized`]: symmetric batch prefetching with leader-based XOR
//!   delivery. Only the `C(K,t+1) - C(K-N_e,t+1)` messages touching a leader
//!   are sent; non-leaders rebuild the rest from the XOR identity in
//!   [`centralized::verify_lemma1`].
//! - [`decentralized`]: uniformly random prefetching, with the same delivery
//!   applied independently to every level of the bit partition.
//! - [`rate_analysis`]: exact rate-memory formulas (average and peak,
//!   centralized and decentralized), the prior-art baselines, and the
//!   converse bound for an arbitrary uncoded placement.
//! - [`model`]: the file database, placements, demands and their statistics.
//! - [`combinatorics`]: binomials, subset ranking, surjection counts and the
//!   exact lower convex envelope.
//!
//! Every rate is computed as an exact rational and only converted to `f64`
//! for display.
//!
//! ```
//! use cachekit::{centralized, model::{Database, Demand}};
//!
//! // 3 files, 6 users, t = 2: each file split into C(6,2) = 15 subfiles.
//! let db = Database::generate(3, 15, 7);
//! let placement = centralized::batch_placement(3, 6, 2, 15).unwrap();
//! let demand = Demand::new(vec![1, 1, 2, 2, 3, 3], 3).unwrap();
//! let messages = centralized::encode_delivery(&db, &placement, &demand).unwrap();
//! assert_eq!(messages.len(), 19);
//! ```

pub mod bits;
pub mod centralized;
pub mod cli;
pub mod combinatorics;
pub mod decentralized;
pub mod error;
pub mod model;
pub mod rate_analysis;

pub use error::{Error, Result};
