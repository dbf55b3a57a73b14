//! Thermal dynamics of Pauli frames: detailed-balance rates, kinetic Monte
//! Carlo with decoder-based failure times, the exact gap on tiny lattices,
//! and the numeric mixing-time bound.

mod bound;
mod decoder;
mod gap;
mod kmc;
mod memory;
mod rates;

pub use bound::{arrhenius_bound, ArrheniusBound};
pub use decoder::{Decoder, DecoderKind, BRUTE_LAMBDA, MAX_BRUTE_COSETS};
pub use gap::{exact_chain_gap, GapReport, MAX_GAP_STATES};
pub use kmc::{kmc_run, next_event, Dynamics, Event, GridSample, RunOptions, Simulation, Trajectory, GRID_POINTS};
pub use memory::{
    bootstrap_median_ci, calibrate_max_time, medians_nondecreasing, memory_time_estimate, quantile, sweep,
    MemoryTimeEstimate, SweepRow,
};
pub use rates::{all_moves, max_move_delta, move_delta, transition_rates, Move, RateKind, RateModel};
