//! 3-D Navier–Stokes, the slow-variable lift of 2.5-D data and the remainder
//! system about the lifted solution.

mod lift;
mod remainder;
mod run;
mod solver;

pub use lift::{
    build_u_app, commensurate_stride, forcing_f_eps, forcing_onto, lift_initial_data, lift_onto,
    lift_scalar, slow_grid, State3D,
};
pub use remainder::{
    run_remainder, run_remainder_with, BackgroundMode, MarchingSource, RemainderOptions,
    RemainderRun, RemainderSample, SliceSource,
};
pub use run::{run3d, Sample3D, Trajectory3D};
pub use solver::{step3d, Background, Ns3d};


#[cfg(test)]
mod tests;
