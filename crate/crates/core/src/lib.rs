//! Lower-bound machinery for r-neighborly embeddings: exact mod-2
//! characteristic-class pairings, the arithmetic bounds on the ambient
//! dimension, and numerical certificates for the moment curve.

pub mod bounds;
pub mod config_rank;
pub mod gf2_ring;
mod linalg;
pub mod moment;
pub mod sw_classes;

pub use gf2_ring::{binom_parity, ClassElement, Monomial, RingError, RingSpec};
