//! Hierarchical analogical classification of sketches and images.
//!
//! The pipeline, bottom-up:
//!
//! 1. [`raster`]: binarize, thin and vectorize bitmaps into strokes.
//! 2. [`glyph`] and [`shape`]: group strokes into glyphs and describe each one
//!    qualitatively (segments, edge cycles, containment).
//! 3. [`relations`]: qualitative spatial relations between glyphs.
//! 4. [`sme`]: structure mapping between two case descriptions.
//! 5. [`retrieval`], [`sage`]: MAC/FAC retrieval and analogical generalization.
//! 6. [`phal`]: classification cascade over edges, cycles and glyphs.
//! 7. [`harness`]: datasets, experiments and reports.

pub mod case;
pub mod dataset;
pub mod encode;
pub mod error;
pub mod geom;
pub mod glyph;
pub mod harness;
pub mod phal;
pub mod raster;
pub mod relations;
pub mod retrieval;
pub mod sage;
pub mod shape;
pub mod sme;
pub mod vrd;

pub use error::{HpsError, Result};
