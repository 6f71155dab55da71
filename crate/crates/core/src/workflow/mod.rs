//! Three-sector band-gap pipeline.

mod config;
mod gap;
mod run;

pub use config::{load_config, parse_config, InteractionMode, ReferenceChoice, Solver, WorkflowConfig};
pub use gap::{compute_gap, sector_specs, single_particle_gap, Sector};
pub use run::{
    apply_mode, parse_sweep_csv, run_workflow, run_workflow_on, write_outputs, GapReport, ReportSettings,
    SampleSummary, SectorReport, StageTiming, SweepRow, SweepTable, WorkflowOutput, REPORT_FILE, SWEEP_HEADER,
};
