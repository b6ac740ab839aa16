//! Nonstationary subdivision pyramids.
//!
//! Level-dependent subdivision masks refine coarse data, reverse decimation
//! filters undo them, and the two together give a multiscale pyramid of
//! coarse samples plus per-level details. The geometry module applies this
//! to closed planar curves.

pub mod decimation;
pub mod error;
pub mod geometry;
pub mod pyramid;
pub mod sequences;
pub mod subdivision;

pub use decimation::{solve_gamma, DecayFit, DecimationFilter};
pub use error::{Error, Result};
pub use geometry::{CircularityReport, PlanarCurve};
pub use pyramid::{analyze, Boundary, LevelSchedule, Pyramid, PyramidConfig};
pub use sequences::{FinSeq, PeriodicSeq, Seq};
pub use subdivision::{CurveClass, CurveKind, FamilyId, Mask, SchemeFamily};
