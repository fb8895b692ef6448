//! Screened Vlasov–Poisson plasma with a fast point charge: Penrose stability, the
//! linear-response Green's function, stopping power, deceleration, the characteristics
//! geometry and a δf marker simulator.

pub mod charge_dynamics;
pub mod dispersion;
pub mod error;
pub mod greens;
pub mod interp;
pub mod kinetics;
pub mod profiles;
pub mod quadrature;
pub mod response;
pub mod simulator;
pub mod vec3;
pub mod volterra;

pub use error::{Error, Result};
pub use profiles::{build_profile, MuKind, Profile, ProfileSpec};
