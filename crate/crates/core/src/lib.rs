pub mod aliasing;
pub mod chainmodel;
pub mod gasmodel;
pub mod harness;
pub mod minisol;
pub mod retryable;
pub mod rules;
pub mod sequencer;
