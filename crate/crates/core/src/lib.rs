//! Zone scheduling for automated guided vehicles.
//!
//! The pipeline loads an [`instance::Instance`], computes time windows and
//! pairwise conflicts ([`preprocess`]), builds an integer linear program
//! ([`ilp`]), and either solves it exactly ([`exact`]) or transcribes it to a
//! QUBO/Ising model ([`qubo`]) for the annealing heuristics in [`anneal`].
//! Schedules are checked independently of the model by [`verify`].

pub mod anneal;
pub mod cli;
pub mod exact;
pub mod ilp;
pub mod instance;
pub mod preprocess;
pub mod qubo;
pub mod suite;
pub mod verify;
