//! Experiment specs, figure pipelines, `τ` sweeps, and power-law fits.

mod experiments;
mod fit;
mod spec;
mod sweep;

pub use experiments::{
    equivalence, fig1_thermal, fig2_single, fig4_two, fig8_overlay, full_width_half_max,
    krylov_report, max_abs_deviation, max_z, run_experiment, scaling, write_profiles,
    EquivalenceOutput, KrylovOutput, KrylovRow, OverlayOutput, OverlaySummary, PeakSummary,
    ScalingOutput, SingleOutput, SingleSummary, ThermalOutput, ThermalSummary, TwoOutput,
};
pub use fit::{powerlaw_fit, PowerLawFit};
pub use spec::{
    EquivalenceParams, ExperimentKind, ExperimentSpec, KrylovParams, Params, ProfileParams,
    ScalingParams, ThermalParams, PAPER_REALIZATIONS, PAPER_STEPS,
};
pub use sweep::{
    fit_points, sweep_geometry, tau_point, tau_sweep, SweepKind, SweepSettings, TauPoint,
};
