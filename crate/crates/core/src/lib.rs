//! Information-theoretic metrics for visual abstraction.
//!
//! Data, visualization and task spaces are modelled as finite alphabets;
//! visual mappings and viewer interpretations are channels between them.
//! From these the crate computes alphabet compression, potential
//! distortion and cost-benefit ratios of single stages and whole
//! pipelines, compares a visual route against reading data directly, and
//! models abstraction axes and spaces.

pub mod alphabet;
pub mod axis;
pub mod channel;
pub mod costbenefit;
pub mod exec;
pub mod exemplar;
pub mod report;
pub mod scenario;

pub use alphabet::{
    entropy, kl_divergence, make_quantized_range, make_uniform, make_uniform_count, Alphabet, AlphabetError, Letter,
    Letters, Pmf, Violation,
};
pub use axis::{
    build_axis, classify_transition, combine_space, detect_fork, AbstractionAxis, AbstractionSpace, AxisError,
    ForkPoint, NodeKind, RepresentationNode, Transition,
};
pub use channel::{
    alphabet_compression, bayes_inverse, compose, potential_distortion, push_forward, reconstructed_pmf, Channel,
    ChannelError, ReconstructionChannel,
};
pub use costbenefit::{
    abstraction_score, compare_routes, direct_cost_benefit, is_abstraction, is_meaningful_visual_abstraction,
    pipeline_cost_benefit, stage_cost_benefit, AbstractionJudgment, ConditionB, CostBenefitError, CostBenefitReport,
    Pipeline, PointOfView, Recon, RouteComparison, RouteOrdering, Stage,
};
pub use exec::Strategy;
pub use exemplar::{exemplar, EXEMPLARS};
pub use report::{analyze, AnalysisError, AnalyzeOptions, Format, Report};
pub use scenario::{load_scenario, Scenario, ScenarioDoc, ScenarioError};
