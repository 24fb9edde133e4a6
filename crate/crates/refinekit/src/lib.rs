//! Many-sorted k-dimensional deductive systems, translations between them,
//! finite models, and mechanical checking of refinement by interpretation.

pub mod deduction;
pub mod frontend;
pub mod models;
pub mod par;
pub mod refinement;
pub mod sigterm;
pub mod translation;
