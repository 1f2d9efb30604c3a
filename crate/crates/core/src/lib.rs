//! Deterministic, seedable simulator and analysis toolkit for an online
//! recommendation model with latent user and item types.
//!
//! Users and items carry hidden types; a hidden sign matrix fixes the
//! preference of every user type for every item type. At each time step an
//! algorithm recommends one item to every user, receives like/dislike
//! feedback, and may never repeat an item to the same user. The crate
//! provides:
//!
//! - [`model`]: the generative environment with feedback and no-repeat
//!   enforcement,
//! - [`algorithm`]: the clustering-based recommendation algorithm, its
//!   parameter selection, baselines, and an anytime (doubling) wrapper,
//! - [`theory`]: closed-form regret curves, lower bounds, thresholds, and
//!   operating-regime classification,
//! - [`instrument`]: ground-truth trace auditing (bad-recommendation
//!   taxonomy and exact counting constraints),
//! - [`regularity`]: exact `(s, eta)`-regularity checking for sign matrices.
//!
//! Everything is driven by counter-based splittable random streams
//! ([`rng`]), so any trace is a pure function of its seeds. The crate is
//! `no_std`-compatible (requires `alloc`); the companion CLI crate carries
//! all IO.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod algorithm;
pub mod instrument;
pub mod math;
pub mod model;
pub mod regularity;
pub mod rng;
pub mod theory;
