//! Filling machinery over the horosphere: exploded simplices, the
//! cellular map to infinity with its anchor points, coned disks, and
//! Whitney-type Lipschitz fillings of small spheres.

pub mod exploded;
pub mod omega;
pub mod schema;
pub mod sphere;
pub mod whitney;

pub use exploded::{build_exploded, ExplodedCell, ExplodedComplex, LocatedPoint};
pub use omega::{
    build_omega_infty, contract_in_shadow, eval_f, omega_eval, ConeRecord, FaceData, FaceMap,
    FillParams, InfinityFill, LoopCone, OmegaData,
};
pub use sphere::{PiecewiseGeodesicSphere, TitsArc, TitsPath};
pub use whitney::{
    antipodal_mesh_distance, flat_sphere_on_z, whitney_fill_disk, whitney_fill_path,
    AntipodalRoutes, DiskInZ, FlatCycle, LoopInZ, OmegaProvider, PathInZ, WhitneyParams,
};
