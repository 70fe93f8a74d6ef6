//! Executable geometry for thin-framed triangles.
//!
//! The crate is split by subject:
//!
//! * [`metric_core`] builds comparison frames `(a, b, c, d)` in trees, the
//!   plane, the hyperbolic plane and the sphere, and tests bounding functions.
//! * [`flat_surface`] handles translation and half-translation surfaces given
//!   by glued polygons: cone angles, the `g_t` action, saddle connections,
//!   cylinders, vertical decompositions and intersection counts.
//! * [`iet`] has interval exchanges, first returns, Keane checks and the tall
//!   subsection construction.
//! * [`torus_teich`] is the upper half-plane model of the genus-one
//!   Teichmuller space.
//! * [`random_walk`] runs random walks of mapping classes and measures drift,
//!   records and tracking.

pub mod flat_surface;
pub mod hyperbolic;
pub mod iet;
pub mod metric_core;
pub mod numeric;
pub mod random_walk;
pub mod torus_teich;

pub use flat_surface::{Cylinder, FlatCurve, FlatSurface, Holonomy, SaddleConnection};
pub use iet::{IntervalExchange, TallSectionCertificate, ZipperedRectangles};
pub use metric_core::{StarReport, TriangleFrame};
pub use numeric::Rational;
pub use random_walk::{CocycleTable, DriftEstimate, SamplePath, WalkConfig};
pub use torus_teich::{CurveClass, MappingClass, TeichGeodesic, TorusPoint};
