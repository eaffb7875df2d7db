//! Overcorrection-aware GEC data construction, edit scoring and system
//! combination.

pub mod align;
pub mod cli;
pub mod corpus;
pub mod ensemble;
pub mod llm;
pub mod recover;
pub mod score;
