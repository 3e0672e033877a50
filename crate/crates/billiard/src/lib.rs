//! Numerical laboratory for planar convex billiards.
//!
//! The crate is organized bottom-up:
//!
//! - [`special_functions`]: complete/incomplete elliptic integrals, Jacobi
//!   amplitude and sn/cn, and the analyticity half-width of 1 - k² sin² z.
//! - [`elliptic_geometry`]: ellipse parametrization, confocal caustics and
//!   rotation numbers, boundary action-angle coordinates, finite Fourier
//!   series.
//! - [`billiard_core`]: boundary representations, the billiard map, orbit
//!   iteration, Lazutkin coordinates.
//! - [`spectrum`]: maximizing periodic orbits, length profiles, the
//!   deviation functional Δ_{p/q}, Mather β values.
//! - [`adapted_basis`]: dynamical modes adapted to rational caustics,
//!   elliptic-motion generators, correlation matrices, truncated inversion,
//!   best-fit ellipses.
//! - [`als_flow`]: affine curvature, the affine length shortening flow, and
//!   monotonicity experiments for the deviation functional.
//! - [`cli_io`]: experiment configs, deterministic CSV/JSON emission.

pub mod adapted_basis;
pub mod als_flow;
pub mod billiard_core;
pub mod cli_io;
pub mod elliptic_geometry;
pub(crate) mod numerics;
pub mod special_functions;
pub mod spectrum;
