//! Knowledge graph alignment and extension toolkit.

pub mod assess;
pub mod config;
pub mod error;
pub mod extend;
pub mod fca;
pub mod ingest;
pub mod lexsim;
pub mod matcher;
pub mod model;
pub mod pipeline;
pub mod propsim;
pub mod recognizer;

pub use error::{KgError, Result};
pub use model::{ConceptRef, KnowledgeGraph};
