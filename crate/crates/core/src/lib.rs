//! Construction and verification of traveling nanopterons (solitary fronts with
//! an exponentially small periodic ripple) in the diatomic FPUT lattice near
//! the sonic speed.
//!
//! Pipeline: `dispersion` locates the resonant frequency, `projection` realizes
//! the spectral splitting of the advance-delay operator, `reduced_system` holds
//! the normal form with its homoclinic and fundamental solutions,
//! `periodic_orbit` solves for the ripple, `nanopteron_solver` builds the
//! generalized homoclinic by a weighted-norm fixed point, and `lattice_sim`
//! checks the result against the lattice itself.

pub mod dispersion;
pub mod error;
pub mod lattice_sim;
pub mod nanopteron_solver;
pub mod numerics;
pub mod periodic_orbit;
pub mod projection;
pub mod reduced_system;

pub use error::{Error, Result};
