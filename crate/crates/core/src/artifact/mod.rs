//! Artifactual component selection, rejection and artifact-diminished unmixing.

mod correlation;
mod diminished;
mod reject;
mod wmsf;

pub use correlation::{
    build_correlation_report, eog_component_correlation, lagged_correlation, select_artifactual,
    CorrelationReport, LaggedCorrelation, DEFAULT_MAX_LAG,
};
pub(crate) use correlation::cumulative_correlation;
pub use diminished::{
    excise_artifacts, fit_diminished_unmixing, unmixing_difference, RelDiffCell, UnmixingDifference,
};
pub use reject::{complete_reject, partial_reject, DEFAULT_ALPHA};
pub use wmsf::msf_to_wmsf;
