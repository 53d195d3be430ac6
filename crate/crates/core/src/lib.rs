pub mod cli;
pub mod corpus;
pub mod eval;
pub mod pipeline;
pub mod recurrent;
pub mod training;
