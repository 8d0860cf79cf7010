//! Reference laws, goodness-of-fit tests, and the experiment runners.

mod density;
mod experiments;
mod gof;

pub use density::{arrival_joint_density, simpson, ReferenceDensity};
pub use gof::{
    aligned_counts, chi_square, chi_square_two_sample, jitter, kolmogorov_sf, ks_distance, ks_statistic, ks_test,
    ks_two_sample, tv_distance, TestResult, KS_MIN_SAMPLE, MIN_EXPECTED,
};
pub use experiments::{
    bienayme_two_point, experiment_core_size, experiment_core_size_with_pool, experiment_critical_er,
    experiment_crt_distance, experiment_degree_model, experiment_subtree_sizes, experiment_surplus_metric, glued_two_point, limit_largest,
    parse_degree_law, run_named, spearman, Check, CriticalErParams, DegreeExperimentParams, LimitSettings, Report,
    Series, Verdict, EXPERIMENTS, P_FLAG, P_PASS,
};
