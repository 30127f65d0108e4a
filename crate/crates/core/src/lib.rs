//! Day-ahead scheduling and frequency-reserve bidding for a grid-connected
//! alkaline electrolyzer with compressor and hydrogen storage.
//!
//! The crate assembles a mixed-integer linear program that maximises profit
//! from hydrogen sales and Nordic FCR-N / FCR-D Up / FCR-D Down reserve
//! payments against spot purchases, grid tariffs and start-up costs, solves
//! it through a pluggable backend, and checks the decoded schedule
//! independently of the solver.
//!
//! * [`model`] holds the instance types, the model builder and the decoder.
//! * [`milp`] is the solver-independent MILP layer with LP-format emission,
//!   solver backends and a brute-force reference solver.
//! * [`piecewise`] fits and evaluates the power-to-hydrogen curve.
//! * [`fcr`] contains the frequency response functions and the activation
//!   simulator.
//! * [`io`] reads and writes the file formats and runs sensitivity sweeps.

pub mod fcr;
pub mod io;
pub mod milp;
pub mod model;
pub mod piecewise;
pub mod tolerance;

pub use model::{
    build_model, decode_solution, schedule_instance, validate_instance, DemandContract,
    DemandWindow, ElectrolyzerParams, InitialState, Instance, Mode, PriceSeries, Schedule,
};
