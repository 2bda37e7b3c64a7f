pub mod allen;
pub mod cli;
pub mod constraints;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod hypergraph;
pub mod io;
pub mod learner;
pub mod mining;
pub mod query;
pub mod rule;
pub mod synth;
pub mod walk;
