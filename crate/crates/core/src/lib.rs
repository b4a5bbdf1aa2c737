//! Simulation toolkit for relay-assisted device-to-device connectivity on
//! random street systems.
//!
//! The crate is organised around one pipeline:
//!
//! 1. [`street`] generates Poisson-Voronoi street systems in a rectangular
//!    observation window and measures their geometry.
//! 2. [`crossroad`] gives the exact distribution of crossroad angles and the
//!    blocking surfaces they induce, and from those the probability that a
//!    crossroad is occupied (by a pedestrian user or a parked relay).
//! 3. [`network`] samples users on the streets and relays on the crossroads
//!    and builds the line-of-sight connectivity graph.
//! 4. [`percolation`] estimates the critical occupation probability above
//!    which the connectivity graph spans the window.
//! 5. [`relay`] inverts the occupation model at the percolation threshold to
//!    obtain the minimal relay proportion an operator must sustain.
//! 6. [`econ`] turns the relay fleet into a monthly cash-flow model of the
//!    deployment.
//!
//! All lengths are in kilometers unless a type documents otherwise (crossroad
//! blocking surfaces work in meters, matching street-width scales).

pub mod crossroad;
pub mod econ;
pub mod error;
pub mod geom;
pub mod network;
pub mod percolation;
pub mod relay;
pub mod seeds;
pub mod street;
pub mod union_find;

pub use error::{Error, Result};
