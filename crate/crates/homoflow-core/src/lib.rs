//! Finitary criteria for amenability and unique ergodicity of automorphism
//! groups of homogeneous digraphs: expansion enumeration and counting,
//! consistent random expansions, certificates, composition classes and
//! quantitative expansion property experiments.

pub mod composition;
pub mod error;
pub mod expansion_classes;
pub mod hrushovski;
pub mod qop_lab;
pub mod random_expansion_solver;
pub mod structures;
pub mod trees;

pub use error::{Error, Result};
pub use expansion_classes::Expansion;
pub use structures::{ClassSpec, Embedding, FiniteStructure};
