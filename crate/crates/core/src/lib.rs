//! Numerical tools for area-preserving maps of the annulus and the disk:
//! action functions, Calabi invariant, flux, rotation numbers, periodic
//! orbits, the annulus-to-disk embedding and action–rotation diagrams.

pub mod action;
pub mod analysis;
pub mod embedding;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod mapdef;
pub mod orbits;
pub mod report;
pub mod surface;

pub use action::{invariants, ActionField, InvariantReport, Measure};
pub use analysis::{build_diagram, Diagram, HypothesisValues, MeasurePoint, Status, Verdict};
pub use embedding::{embed, DiskMap, EmbeddingParams};
pub use error::{Error, Result, SourcePos};
pub use mapdef::{parse_map, AreaMap, MapDefinition, MapSpec, Normalization, TaskConfig};
pub use orbits::{find_periodic_orbits, BirkhoffSample, PeriodicOrbit, SearchParams};
pub use surface::{lift_unwrap, pt, AnnulusChart, Chart, CoverPath, DiskChart, Mat2, Point, PrimitiveForm};
