//! Numerical laboratory for tridiagonal β-ensembles and their operator limits.
//!
//! The crate samples finite random matrix models (β-Hermite, GOE, circular β,
//! critical 1-d random Schrödinger), simulates the limiting random operators
//! (stochastic Airy operator through its Riccati diffusion, the Brownian
//! carousel for Sine_β and Sch_τ), and evaluates the deterministic laws they
//! are compared against (Airy function, Hastings–McLeod Painlevé II solution,
//! Tracy–Widom F₂ and its rank-one deformation).
//!
//! Every random quantity is a pure function of a `(seed, stream_id)` pair, see
//! [`stochastics::RngStream`], so Monte Carlo runs are bit-reproducible at any
//! thread count.

pub mod airy;
pub mod carousel;
pub mod ensembles;
pub mod error;
pub mod io;
pub mod painleve;
pub mod statkit;
pub mod stochastics;
pub mod szego;
pub mod tridiag;
pub mod verify;

pub use error::{Error, Result};
pub use num_complex::Complex64;
