//! Randomized verification of the pointwise inequalities satisfied by the
//! degenerate flux, the V-map, the profile and the weight.

mod campaign;
mod pair;

pub use campaign::{
    run_campaign, CampaignReport, ComboReport, Inequality, InequalityStats, SampleConfig, Witness,
};
pub use pair::{
    check_pair, check_scalar, v_vs_h_constant, Margin, PairChecker, PairMargins, ScalarMargins,
    RELATIVE_SLACK,
};
