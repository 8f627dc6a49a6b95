//! The 2.5-D system in vorticity form: per-slice 2-D Navier–Stokes coupled
//! only through the vertical diffusion `ε²∂₃²`.

mod energy;
mod pressure;
mod solver;
mod state;

pub use energy::{energy_ledger, EnergyReport, EnergyRow, SliceLedger};
pub use pressure::{pressure, pressure_and_dz};
pub use solver::{rhs, run, run_with, step, Ns25d, RunOptions};
pub use state::{biot_savart, Sample, SliceStackState, Trajectory, TrajectorySummary};


#[cfg(test)]
mod tests;
