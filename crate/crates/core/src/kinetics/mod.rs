//! Characteristics of the plasma in the field of the moving charge, the collision geometry, the
//! straightening map and the source terms of the density equation.

pub mod characteristics;
pub mod field;
pub mod geometry;
pub mod norm;
pub mod path;
pub mod sources;
pub mod straighten;

pub use characteristics::{integrate_characteristics, Anchored, CharOptions, CharResult, Tracer};
pub use field::{ChargeField, FieldSampler, GridField, Mode, Provenance, SyntheticField, UniformField, ZeroField};
pub use geometry::{geometry, Collision, GeometrySample, Region, RegionParams};
pub use norm::{y_weights, yt_norm, YSample};
pub use path::ChargePath;
pub use sources::{charge_source, charge_source_linearized, reaction_term, SourceQuad, SourceValue};
pub use straighten::{straighten, StraightenOptions, Straightened};
