pub mod constants;
pub mod cover;
pub mod geometry;
pub mod lattice;
pub mod lemma_lab;
pub mod morse;
pub mod report;
