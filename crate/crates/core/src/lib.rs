//! Entanglement harvesting by pairs of Unruh-DeWitt detectors in accelerated,
//! thermal and de Sitter settings, with amplitudes that can exceed f64 range.

pub mod detector;
pub mod entanglement;
pub mod error;
pub mod expnum;
pub mod quadrature;
pub mod residues;
pub mod saddle;
pub mod scan;
pub mod wightman;

pub use detector::{Detector, DetectorConfig, DimensionlessPoint, Scenario, SpacetimeEvent};
pub use error::{HarvestError, Result};
pub use expnum::ExpComplex;
