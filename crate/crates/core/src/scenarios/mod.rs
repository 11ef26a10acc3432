//! Scenario files, blob initial data, single runs, ε-studies and output
//! files.
//!
//! A scenario is a TOML document:
//!
//! ```toml
//! name = "slope"
//!
//! [domain]
//! kind = "rectangle"        # unit_disk | rectangle | annulus
//! width = 2.0
//! height = 1.0
//!
//! [bathymetry]
//! kind = "affine"           # constant | affine | radial | bump
//! c0 = 1.0
//! slope = [0.0, 1.0]
//!
//! [blob]
//! profile = "smooth"        # smooth | cosine
//! center = [-0.5, 0.0]
//! epsilon = 0.05
//! circulation = 1.0
//!
//! [islands]                 # annulus only
//! circulations = []
//!
//! [run]                     # every key optional
//! resolution = 128
//! s_end = 1.0
//! ```

mod blob;
mod config;
mod emit;
mod run;
mod study;

pub use blob::{cells_across, concentrated_blob, local_spacing, Profile};
pub use config::{load_scenario, BlobSpec, IslandSpec, RunSpec, Scenario, MIN_CELLS_ACROSS};
pub use emit::{emit_run, emit_study, run_report};
pub use run::{
    run, Initial, Provenance, RunOutput, RunSummary, Verdict, ENERGY_BUDGET, GAMMA_BUDGET, STATIONARY_CELLS,
};
pub use study::{
    convergence_study, member_scenario, resolution_for, ConvergenceReport, Study, StudyMember, STUDY_CELLS_ACROSS,
};
