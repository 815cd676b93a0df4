//! Transient pressure modelling and leak localization for a single gas
//! pipeline section under the linearized isothermal flow model.
//!
//! The pressure field obeys `∂P/∂t = D·∂²P/∂x² − c²·G·δ(x − ℓ)` with
//! `D = c²/(2a)` and prescribed boundary fluxes. The crate provides the
//! closed-form and general series solutions, a finite-difference oracle,
//! two leak localizers and a streaming detector.

pub mod config;
pub mod detect;
pub mod error;
pub mod fd;
pub mod field;
pub mod general;
pub mod localize;
pub mod model;
pub mod series;
pub mod stream;
pub mod tables;

pub use config::{PipelineConfig, PipelineParams, RunConfig};
pub use detect::{
    run_detection, DetectionConfig, DetectionEvent, Detector, EventKind, Location, SensorSample,
};
pub use error::{Error, Result};
pub use fd::{compare_fields, solve_fd, ComparisonReport, FdConfig, FdSolver};
pub use field::{tabulate_field, FieldSource, PressureField};
pub use general::{pressure_general, FlowSchedule, GeneralSolver};
pub use localize::{
    bias_sweep, drop_ratio, estimate, estimate_closed_form, estimate_numeric_inversion,
    fixation_time, weight_coefficient, DropPair, LocalizationReport, Method,
};
pub use model::{LeakScenario, PipelineSpec};
pub use series::{leak_drop, pressure_closed_form, SeriesControl};
pub use stream::{generate_stream, StreamParams};
