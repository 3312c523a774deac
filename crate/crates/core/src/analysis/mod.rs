//! Dark-state analysis, transfer-rate estimates and hybrid-basis pathways.

mod invariant;
mod pathways;
mod rates;

pub use invariant::{
    asymptotic_sink, asymptotic_sink_in, invariant_subspace, site_vector, InvariantReport,
    InvariantSubspace, CLOSURE_TOLERANCE, DEGENERACY_TOLERANCE,
};
pub use pathways::{
    pathway_report, CouplingEdit, HybridCouplings, PathwayConfig, PathwayRatios, PathwayReport,
    Surgery,
};
pub use rates::{
    correlation, detrend, sample_at, sign_changes, transfer_rate, trapping_decay_rate,
};
