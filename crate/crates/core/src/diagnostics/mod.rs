//! Norms, functionals, cut-off schedules and inequality monitors.

mod besov;
mod fit;
mod functionals;
mod monitors;
mod norms;
mod report;
mod schedule;

pub use besov::{besov_minus1_inf, besov_minus_delta, besov_of_spectrum, TimeGrid};
pub use fit::{fit_decay, fit_line, DecayFit, LineFit, POWER_LAW_R2};
pub use functionals::{
    a_delta, aux_constants, n_app, n_functional, running_integral, u0_functional, AuxConstants, AuxParams, DataNorms,
};
pub use monitors::{
    lowfreq_check, wiegner_check, wiegner_series, LowFreqReport, LowFreqRow, MonitorField, WiegnerReport,
    WiegnerRow,
};
pub use norms::{l2_global, linf_3d, mixed_norm, mixed_norm_scalar, sobolev3d, SliceSpectrum, VNorm};
pub use report::{
    data_summary, norm_report, norm_row, write_csv, write_json, DataSummary, NormReport, NormRow, NORM_COLUMNS,
};
pub use schedule::{Schedule, ScheduleKind};
