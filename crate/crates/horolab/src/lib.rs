//! Horosphere geometry lab for the symmetric space `X = SL(n,R)/SO(n)`.
//!
//! The crate models `X` as the manifold of symmetric positive-definite
//! matrices of determinant one and builds, on top of that model, the
//! machinery needed to study horospheres at desk scale:
//!
//! * [`liecore`] — the matrix kernel: Iwasawa `N·A·K` factorization,
//!   nilpotent logarithms, root data relative to the diagonal Cartan,
//!   and conjugation by one-parameter diagonal subgroups.
//! * [`symspace`] — distance, geodesics, maximal flats, boundary points
//!   at infinity, and Busemann functions in horospherical coordinates.
//! * [`chambers`] — chambers at infinity as complete flags, opposition
//!   and transversality certificates, the shadow calculus `rho_x`, and
//!   constructions of flats opposite a chamber.
//! * [`horosphere`] — the horosphere `Z = h^{-1}(0)`, projection of
//!   shadow directions onto `Z`, the product metric on direction/point
//!   pairs, and a retraction of neighborhoods of `Z` onto `Z`.
//! * [`filling`] — exploded simplices, the cellular map to infinity with
//!   its anchor points, coning maps, and Whitney-type Lipschitz fillings
//!   of 0- and 1-spheres inside `Z`.
//! * [`suites`], [`report`], [`config`], [`calibrate`] — the experiment
//!   harness behind the `horolab` command-line tool: seeded verification
//!   suites, distortion and divergence experiments, CSV/JSON reports.
//!
//! Everything is plain-`f64` numerics over small dense matrices; all
//! values are immutable after construction and all operations are pure
//! functions, so the whole crate is safe to drive from multiple threads.
//! Sampling routines take an explicit seeded generator and are
//! deterministic given the seed; callers that want parallel sampling
//! must partition the seed space.

pub mod calibrate;
pub mod chambers;
pub mod config;
pub mod error;
pub mod filling;
pub mod horosphere;
pub mod liecore;
pub mod linalg;
pub mod policy;
pub mod report;
pub mod sampling;
pub mod suites;
pub mod symspace;

pub use error::{Error, Result};
pub use policy::NumericPolicy;
