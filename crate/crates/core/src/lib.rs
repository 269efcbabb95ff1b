//! Decomposition of surfaces of revolution into flat boxes, and numerical
//! decoupling experiments on the resulting partitions.

pub mod curvature;
pub mod error;
pub mod fourierlab;
pub mod geometry;
pub mod partition;
pub mod profile;
pub mod series;
pub mod structure;
pub mod surface;

pub use error::{Error, Result};
pub use geometry::{AffineMap, BoxFrame, Vec3};
pub use partition::{build_partition, BoxRecord, CapFootprint, PartitionManifest, PieceCase};
pub use profile::{make_profile, Interval, Jet, Profile, ProfileKind, ProfileSpec};
pub use structure::{
    decompose_interval, find_curvature_zeros, validate_expansion_radius, DegeneracyCase, IntervalDecomposition,
    ZeroPoint,
};
pub use surface::{Cylinder, Revolution, Surface};
