//! Config-driven experiments: initial data, `ε` sweeps, decay and monitor
//! runs, the invariant suite, and their persisted outputs.

mod config;
mod experiments;
mod ic;
mod pool;
mod sweep;
mod verify;

pub use config::{
    apply_override, CampaignSpec, Experiment, FitConfig, GridConfig, MonitorConfig, SweepConfig,
    TimeConfig, ALLOWED_EPS,
};
pub use experiments::{
    data_norms, initial_state, read_checkpoint, remainder_csv, run_decay, run_full3d, run_single_remainder,
    run_wiegner, write_checkpoint, DataManifest, DecayManifest, DecayOutcome, LowFreqSummary, MonitorSummary,
    RemainderManifest, Row3D, Run3dManifest, WiegnerManifest, WiegnerOutcome, CHECKPOINT, NORMS_CSV,
};
pub use ic::{make_initial_data, HMode, IcSpec, NamedProfile, Profile, VMode};
pub use pool::{thread_cap, with_workers, THREADS_ENV};
pub use sweep::{
    eps_tag, order_of_convergence, run_sweep, sweep_entry, FitStatus, RecordStatus, SlopeFit,
    SweepManifest, SweepOutcome, SweepRecord, EXACT_TOL, MANIFEST,
};
pub use verify::{
    energy_residual, max_principle_growth, projector_errors, random_state, remainder_exactness, run_verify,
    taylor_green_error, Check, ProjectorErrors, VerifyOptions, VerifyReport,
};
