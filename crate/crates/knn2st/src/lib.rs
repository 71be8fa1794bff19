pub mod error;
pub mod gauss;
pub mod integrate;
pub mod knn_graph;
pub mod rng;
pub mod sampling;
pub mod statistic;

pub use error::{Error, Result};
pub use integrate::{IntegralEstimate, IntegratorConfig};
pub use knn_graph::{
    build_knn_graph_brute, build_knn_graph_indexed, cone_cover_bound, max_in_degree,
    DirectedKnnGraph, PointCloud,
};
pub use rng::{substream, StreamRng};
pub use sampling::{
    sample_count, sample_poissonized, spherical_normal_family, Density, FamilyDensity,
    FamilyModel, IsotropicGaussian, LabeledPointCloud, SampleDesign, SphericalNormal, Support,
    TruncatedFamily,
};
pub use statistic::{
    conditional_mean, conditional_moments, conditional_test, conditional_variance_exact,
    cross_edge_count, null_mean, null_variance_sigma0, run_test, run_test_on_graph,
    ConditionalMoments, Side, TestConfig, TestOutcome,
};
