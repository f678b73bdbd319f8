//! Stages, pipelines and the cost-benefit metric.
//!
//! A stage pairs a forward channel with a reconstruction and a cost. Its
//! benefit is alphabet compression minus potential distortion; a pipeline
//! adds benefits and costs over its stages. This module also compares a
//! visual route `d -> v -> t` against a direct route `d -> t`, scores
//! abstraction judgments, and holds the two abstraction predicates.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{entropy_bits, same_letters, AlphabetError, Pmf, COMPARE_TOLERANCE};
use crate::channel::{
    alphabet_compression, bayes_inverse_with, potential_distortion_with, push_forward_with, Channel, ChannelError,
    ReconstructionChannel,
};
use crate::exec::Strategy;
use crate::report::ext;

/// Tolerance for the algebraic identities checked on reports.
pub const IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostBenefitError {
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Alphabet(#[from] AlphabetError),
    #[error("cost must be finite and non-negative, got {0}")]
    InvalidCost(f64),
    #[error("pipeline '{0}' has no stages")]
    EmptyPipeline(String),
    #[error("stage {index} ('{stage}') starts at '{got}' but the previous stage ends at '{expected}'")]
    BrokenChain {
        index: usize,
        stage: String,
        expected: String,
        got: String,
    },
    #[error("supplied reconstruction is not over the letters of '{0}'")]
    SuppliedMismatch(String),
    #[error("routes do not share their {end} alphabet: pipeline has '{pipeline}', direct stage has '{direct}'")]
    EndpointMismatch {
        end: &'static str,
        pipeline: String,
        direct: String,
    },
}

/// How a stage's viewer reconstructs the input.
#[derive(Debug, Clone)]
pub enum Recon {
    /// The posterior under the stage's input distribution, derived at evaluation time.
    Bayes,
    Channel(ReconstructionChannel),
    /// A reconstructed distribution given directly, e.g. to model a reading bias.
    Supplied(Pmf),
}

#[derive(Debug, Clone)]
pub struct Stage {
    id: String,
    forward: Channel,
    recon: Recon,
    cost: f64,
}

impl Stage {
    pub fn new(id: impl Into<String>, forward: Channel, recon: Recon, cost: f64) -> Result<Self, CostBenefitError> {
        if !cost.is_finite() || cost < 0.0 {
            return Err(CostBenefitError::InvalidCost(cost));
        }
        match &recon {
            Recon::Bayes => {}
            Recon::Channel(r) => r.check_orientation(&forward)?,
            Recon::Supplied(q) => {
                if !same_letters(q.letters(), &forward.from().letters) {
                    return Err(CostBenefitError::SuppliedMismatch(forward.from().alphabet.clone()));
                }
                q.validate()?;
            }
        }
        Ok(Stage {
            id: id.into(),
            forward,
            recon,
            cost,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn forward(&self) -> &Channel {
        &self.forward
    }

    pub fn recon(&self) -> &Recon {
        &self.recon
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    fn evaluate(&self, prior: &Pmf, strategy: Strategy) -> Result<(StageMetrics, Pmf), CostBenefitError> {
        let out = push_forward_with(prior, &self.forward, strategy)?;
        let entropy_in = entropy_bits(strategy, prior.masses());
        let entropy_out = entropy_bits(strategy, out.masses());
        let potential_distortion = match &self.recon {
            Recon::Bayes => {
                let r = bayes_inverse_with(&self.forward, prior, strategy)?;
                potential_distortion_with(prior, &self.forward, &r, strategy)?
            }
            Recon::Channel(r) => potential_distortion_with(prior, &self.forward, r, strategy)?,
            Recon::Supplied(q) => crate::alphabet::kl_divergence_with(q, prior, strategy)?,
        };
        let alphabet_compression = entropy_in - entropy_out;
        let benefit = alphabet_compression - potential_distortion;
        let metrics = StageMetrics {
            stage: self.id.clone(),
            from: self.forward.from().alphabet.clone(),
            to: self.forward.to().alphabet.clone(),
            entropy_in,
            entropy_out,
            alphabet_compression,
            potential_distortion,
            cost: self.cost,
            benefit,
            ratio: cost_benefit_ratio(benefit, self.cost),
        };
        Ok((metrics, out))
    }
}

/// Benefit per unit cost, with signed infinities for zero cost and infinite distortion.
pub fn cost_benefit_ratio(benefit: f64, cost: f64) -> f64 {
    if benefit == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else if cost > 0.0 {
        benefit / cost
    } else if benefit > COMPARE_TOLERANCE {
        f64::INFINITY
    } else if benefit < -COMPARE_TOLERANCE {
        f64::NEG_INFINITY
    } else {
        0.0
    }
}

/// Per-stage measurements, all information quantities in bits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageMetrics {
    pub stage: String,
    pub from: String,
    pub to: String,
    #[serde(serialize_with = "ext")]
    pub entropy_in: f64,
    #[serde(serialize_with = "ext")]
    pub entropy_out: f64,
    #[serde(serialize_with = "ext")]
    pub alphabet_compression: f64,
    #[serde(serialize_with = "ext")]
    pub potential_distortion: f64,
    #[serde(serialize_with = "ext")]
    pub cost: f64,
    #[serde(serialize_with = "ext")]
    pub benefit: f64,
    #[serde(serialize_with = "ext")]
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBenefitReport {
    pub id: String,
    pub stages: Vec<StageMetrics>,
    #[serde(serialize_with = "ext")]
    pub entropy_source: f64,
    #[serde(serialize_with = "ext")]
    pub entropy_sink: f64,
    #[serde(serialize_with = "ext")]
    pub alphabet_compression: f64,
    #[serde(serialize_with = "ext")]
    pub potential_distortion: f64,
    #[serde(serialize_with = "ext")]
    pub benefit: f64,
    #[serde(serialize_with = "ext")]
    pub cost: f64,
    #[serde(serialize_with = "ext")]
    pub ratio: f64,
    /// `sum AC_i - (H(source) - H(sink))`; zero up to rounding.
    #[serde(serialize_with = "ext")]
    pub telescoping_residual: f64,
}

impl CostBenefitReport {
    fn from_stages(id: String, stages: Vec<StageMetrics>) -> Self {
        let entropy_source = stages.first().map_or(0.0, |s| s.entropy_in);
        let entropy_sink = stages.last().map_or(0.0, |s| s.entropy_out);
        let alphabet_compression: f64 = stages.iter().map(|s| s.alphabet_compression).sum();
        let potential_distortion: f64 = stages.iter().map(|s| s.potential_distortion).sum();
        let cost: f64 = stages.iter().map(|s| s.cost).sum();
        let benefit = alphabet_compression - potential_distortion;
        CostBenefitReport {
            id,
            entropy_source,
            entropy_sink,
            alphabet_compression,
            potential_distortion,
            benefit,
            cost,
            ratio: cost_benefit_ratio(benefit, cost),
            telescoping_residual: alphabet_compression - (entropy_source - entropy_sink),
            stages,
        }
    }
}

pub fn stage_cost_benefit(s: &Stage, prior: &Pmf) -> Result<CostBenefitReport, CostBenefitError> {
    let (m, _) = s.evaluate(prior, Strategy::default())?;
    Ok(CostBenefitReport::from_stages(s.id.clone(), vec![m]))
}

/// An ordered chain of stages with the distribution of its first alphabet.
#[derive(Debug, Clone)]
pub struct Pipeline {
    id: String,
    stages: Vec<Stage>,
    prior: Pmf,
}

impl Pipeline {
    pub fn new(id: impl Into<String>, stages: Vec<Stage>, prior: Pmf) -> Result<Self, CostBenefitError> {
        let id = id.into();
        let first = stages
            .first()
            .ok_or_else(|| CostBenefitError::EmptyPipeline(id.clone()))?;
        if !same_letters(prior.letters(), &first.forward.from().letters) {
            return Err(CostBenefitError::BrokenChain {
                index: 0,
                stage: first.id.clone(),
                expected: format!("pmf over {} letters", prior.len()),
                got: first.forward.from().alphabet.clone(),
            });
        }
        prior.validate()?;
        for (i, pair) in stages.windows(2).enumerate() {
            let (a, b) = (&pair[0].forward, &pair[1].forward);
            if !same_letters(&a.to().letters, &b.from().letters) {
                return Err(CostBenefitError::BrokenChain {
                    index: i + 1,
                    stage: pair[1].id.clone(),
                    expected: a.to().alphabet.clone(),
                    got: b.from().alphabet.clone(),
                });
            }
        }
        Ok(Pipeline { id, stages, prior })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn prior(&self) -> &Pmf {
        &self.prior
    }

    pub fn source(&self) -> &crate::channel::Endpoint {
        self.stages[0].forward.from()
    }

    pub fn sink(&self) -> &crate::channel::Endpoint {
        self.stages[self.stages.len() - 1].forward.to()
    }
}

/// Combined cost-benefit of a pipeline; each stage sees the distribution pushed through its predecessors.
pub fn pipeline_cost_benefit(p: &Pipeline) -> Result<CostBenefitReport, CostBenefitError> {
    pipeline_cost_benefit_with(p, Strategy::default())
}

pub fn pipeline_cost_benefit_with(p: &Pipeline, strategy: Strategy) -> Result<CostBenefitReport, CostBenefitError> {
    let mut prior = p.prior.clone();
    let mut metrics = Vec::with_capacity(p.stages.len());
    for s in &p.stages {
        let (m, out) = s.evaluate(&prior, strategy)?;
        metrics.push(m);
        prior = out;
    }
    Ok(CostBenefitReport::from_stages(p.id.clone(), metrics))
}

/// Evaluates independent pipelines, in parallel when available; results keep input order.
pub fn evaluate_pipelines(pipelines: &[Pipeline]) -> Vec<Result<CostBenefitReport, CostBenefitError>> {
    Strategy::default().map_slice(pipelines, |p| pipeline_cost_benefit_with(p, Strategy::Sequential))
}

/// Cost-benefit of performing the task straight from the data.
pub fn direct_cost_benefit(direct: &Stage, prior: &Pmf) -> Result<CostBenefitReport, CostBenefitError> {
    stage_cost_benefit(direct, prior)
}

/// Outcome of comparing `d -> v -> t` with `d -> t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteComparison {
    pub pipeline: CostBenefitReport,
    pub direct: CostBenefitReport,
    /// `sum AC(pipeline) - AC(direct)`.
    #[serde(serialize_with = "ext")]
    pub compression_residual: f64,
    pub compression_identity: bool,
    pub cost_premise: bool,
    pub distortion_premise: bool,
    pub premises_satisfied: bool,
    /// `ratio(pipeline)` compared with `ratio(direct)`.
    pub ordering: RouteOrdering,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteOrdering {
    PipelineBetter,
    Equal,
    DirectBetter,
    Incomparable,
}

impl RouteComparison {
    /// True when the premises hold and the visual route wins.
    pub fn conclusion_holds(&self) -> bool {
        self.premises_satisfied && self.ordering == RouteOrdering::PipelineBetter
    }
}

pub fn compare_routes(via: &Pipeline, direct: &Stage) -> Result<RouteComparison, CostBenefitError> {
    let (src, sink) = (via.source(), via.sink());
    if !same_letters(&src.letters, &direct.forward.from().letters) {
        return Err(CostBenefitError::EndpointMismatch {
            end: "data",
            pipeline: src.alphabet.clone(),
            direct: direct.forward.from().alphabet.clone(),
        });
    }
    if !same_letters(&sink.letters, &direct.forward.to().letters) {
        return Err(CostBenefitError::EndpointMismatch {
            end: "task",
            pipeline: sink.alphabet.clone(),
            direct: direct.forward.to().alphabet.clone(),
        });
    }
    let pipeline = pipeline_cost_benefit(via)?;
    let direct = direct_cost_benefit(direct, via.prior())?;

    let compression_residual = pipeline.alphabet_compression - direct.alphabet_compression;
    let compression_identity = compression_residual.abs() <= IDENTITY_TOLERANCE;
    let cost_premise = direct.cost > pipeline.cost;
    let distortion_premise = direct.potential_distortion > pipeline.potential_distortion;
    let premises_satisfied = compression_identity && cost_premise && distortion_premise;
    let ordering = match pipeline.ratio.partial_cmp(&direct.ratio) {
        Some(Ordering::Greater) => RouteOrdering::PipelineBetter,
        Some(Ordering::Equal) => RouteOrdering::Equal,
        Some(Ordering::Less) => RouteOrdering::DirectBetter,
        None => RouteOrdering::Incomparable,
    };

    let mut flags = Vec::new();
    if !compression_identity {
        flags.push(format!(
            "compression identity violated: pipeline AC {} vs direct AC {}",
            pipeline.alphabet_compression, direct.alphabet_compression
        ));
    }
    if !cost_premise {
        flags.push(format!(
            "cost premise violated: direct cost {} <= pipeline cost {}",
            direct.cost, pipeline.cost
        ));
    }
    if !distortion_premise {
        flags.push(format!(
            "distortion premise violated: direct PD {} <= pipeline PD {}",
            direct.potential_distortion, pipeline.potential_distortion
        ));
    }
    if !premises_satisfied {
        flags.push("premises not satisfied".to_string());
    }

    Ok(RouteComparison {
        pipeline,
        direct,
        compression_residual,
        compression_identity,
        cost_premise,
        distortion_premise,
        premises_satisfied,
        ordering,
        flags,
    })
}

/// Whether a visual representation reads as less photo-realistic than its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConditionB {
    Satisfied,
    #[serde(alias = "na")]
    NotApplicable,
    Negated,
}

impl std::str::FromStr for ConditionB {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "satisfied" => Ok(ConditionB::Satisfied),
            "na" | "not_applicable" => Ok(ConditionB::NotApplicable),
            "negated" => Ok(ConditionB::Negated),
            _ => Err(format!("unknown condition B '{s}' (expected satisfied, na or negated)")),
        }
    }
}

/// 2 for condition A, +1 / 0 / -1 for condition B satisfied / not applicable / negated,
/// clamped to `0..=3`.
pub fn abstraction_score(condition_a: bool, condition_b: ConditionB) -> u8 {
    let a = if condition_a { 2 } else { 0 };
    let b = match condition_b {
        ConditionB::Satisfied => 1,
        ConditionB::NotApplicable => 0,
        ConditionB::Negated => -1,
    };
    (a + b).clamp(0, 3) as u8
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Analyze,
    Search,
    Query,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Data,
    Attributes,
    Networks,
    Spatial,
}

/// The task an abstraction serves: an action upon a target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PointOfView {
    pub action: Action,
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub refinement: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbstractionJudgment {
    pub id: String,
    pub condition_a: bool,
    pub condition_b: ConditionB,
    pub score: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub point_of_view: Option<PointOfView>,
}

impl AbstractionJudgment {
    pub fn new(
        id: impl Into<String>,
        condition_a: bool,
        condition_b: ConditionB,
        point_of_view: Option<PointOfView>,
    ) -> Self {
        AbstractionJudgment {
            id: id.into(),
            condition_a,
            condition_b,
            score: abstraction_score(condition_a, condition_b),
            point_of_view,
        }
    }
}

/// Information-loss test: strictly positive alphabet compression.
pub fn is_abstraction(prior: &Pmf, c: &Channel) -> Result<bool, ChannelError> {
    Ok(alphabet_compression(prior, c)? > COMPARE_TOLERANCE)
}

/// Less information and a lower cognitive cost than the source.
///
/// Non-finite inputs and negative costs are never meaningful.
pub fn is_meaningful_visual_abstraction(
    info_source: f64,
    info_target: f64,
    cost_source: f64,
    cost_target: f64,
) -> bool {
    let finite = [info_source, info_target, cost_source, cost_target]
        .iter()
        .all(|x| x.is_finite());
    finite
        && cost_source >= 0.0
        && cost_target >= 0.0
        && info_target < info_source - COMPARE_TOLERANCE
        && cost_target < cost_source
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{make_quantized_range, make_uniform_count, Alphabet};

    fn bar_chart() -> (Alphabet, Alphabet, Channel) {
        let d = make_quantized_range("D", 0.0, 10000.0, 0.01).unwrap();
        let v = make_uniform_count("V", 1001).unwrap();
        let c = Channel::quantizer("plot", &d, &v, 1000).unwrap();
        (d, v, c)
    }

    #[test]
    fn ratio_arithmetic() {
        assert_eq!(cost_benefit_ratio(10.0 - 2.0, 4.0), 2.0);
        assert_eq!(cost_benefit_ratio(3.0, 0.0), f64::INFINITY);
        assert_eq!(cost_benefit_ratio(-3.0, 0.0), f64::NEG_INFINITY);
        assert_eq!(cost_benefit_ratio(0.0, 0.0), 0.0);
        assert_eq!(cost_benefit_ratio(f64::NEG_INFINITY, 5.0), f64::NEG_INFINITY);
    }

    #[test]
    fn identity_stage_has_zero_ratio() {
        let d = make_uniform_count("D", 8).unwrap();
        let s = Stage::new("id", Channel::identity("id", &d).unwrap(), Recon::Bayes, 3.0).unwrap();
        let r = stage_cost_benefit(&s, d.pmf()).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert_eq!(r.stages[0].potential_distortion, 0.0);
    }

    #[test]
    fn bar_chart_stage_ratio() {
        let (d, _, c) = bar_chart();
        let s = Stage::new("plot", c, Recon::Bayes, 1.0).unwrap();
        let r = stage_cost_benefit(&s, d.pmf()).unwrap();
        assert!(r.stages[0].potential_distortion.abs() < 1e-9);
        assert!((r.ratio - 9.964_784_729_798_417).abs() < 1e-9);
    }

    #[test]
    fn negative_cost_rejected() {
        let d = make_uniform_count("D", 2).unwrap();
        let err = Stage::new("s", Channel::identity("id", &d).unwrap(), Recon::Bayes, -1.0).unwrap_err();
        assert_eq!(err, CostBenefitError::InvalidCost(-1.0));
    }

    #[test]
    fn two_identity_stages() {
        let d = make_uniform_count("D", 5).unwrap();
        let st = |id: &str| Stage::new(id, Channel::identity(id, &d).unwrap(), Recon::Bayes, 1.0).unwrap();
        let p = Pipeline::new("p", vec![st("a"), st("b")], d.pmf().clone()).unwrap();
        let r = pipeline_cost_benefit(&p).unwrap();
        assert_eq!(r.benefit, 0.0);
        assert_eq!(r.cost, 2.0);
    }

    #[test]
    fn bar_chart_then_threshold() {
        let (d, v, c) = bar_chart();
        let t = make_uniform_count("T", 2).unwrap();
        let threshold =
            Channel::deterministic("task", &v, &t, (0..1001).map(|h| usize::from(h >= 500)).collect()).unwrap();
        let p = Pipeline::new(
            "dvt",
            vec![
                Stage::new("plot", c, Recon::Bayes, 1.0).unwrap(),
                Stage::new("task", threshold, Recon::Bayes, 1.0).unwrap(),
            ],
            d.pmf().clone(),
        )
        .unwrap();
        let r = pipeline_cost_benefit(&p).unwrap();
        // brute-force enumeration: H(T) from 499500 / 500501 split of 1000001 values
        assert!((r.entropy_sink - 0.999_999_277_210_388).abs() < 1e-12);
        assert!((r.ratio - 9.465_785_367_404_053).abs() < 1e-9);
        assert!(r.telescoping_residual.abs() < 1e-9);
        let per_stage: f64 = r.stages.iter().map(|s| s.benefit).sum();
        assert!((r.benefit - per_stage).abs() < 1e-9);
    }

    #[test]
    fn broken_chain_is_rejected() {
        let a = make_uniform_count("A", 2).unwrap();
        let b = make_uniform_count("B", 3).unwrap();
        let s1 = Stage::new("s1", Channel::constant("c", &a, &b, 0).unwrap(), Recon::Bayes, 1.0).unwrap();
        let s2 = Stage::new("s2", Channel::identity("i", &a).unwrap(), Recon::Bayes, 1.0).unwrap();
        assert!(matches!(
            Pipeline::new("p", vec![s1, s2], a.pmf().clone()),
            Err(CostBenefitError::BrokenChain { index: 1, .. })
        ));
        assert!(matches!(
            Pipeline::new("p", vec![], a.pmf().clone()),
            Err(CostBenefitError::EmptyPipeline(_))
        ));
    }

    #[test]
    fn direct_cost_scaling() {
        let d = make_uniform_count("D", 8).unwrap();
        let t = make_uniform_count("T", 2).unwrap();
        let c = Channel::deterministic("dt", &d, &t, (0..8).map(|i| i / 4).collect()).unwrap();
        let cheap = Stage::new("dt", c.clone(), Recon::Bayes, 1.0).unwrap();
        let dear = Stage::new("dt", c, Recon::Bayes, 10.0).unwrap();
        let a = direct_cost_benefit(&cheap, d.pmf()).unwrap();
        let b = direct_cost_benefit(&dear, d.pmf()).unwrap();
        assert_eq!(a.benefit, 2.0);
        assert!((b.ratio - a.ratio / 10.0).abs() < 1e-12);
    }

    #[test]
    fn scoring_table() {
        use ConditionB::*;
        assert_eq!(abstraction_score(true, Satisfied), 3);
        assert_eq!(abstraction_score(true, NotApplicable), 2);
        assert_eq!(abstraction_score(true, Negated), 1);
        assert_eq!(abstraction_score(false, NotApplicable), 0);
        assert_eq!(abstraction_score(false, Satisfied), 1);
        assert_eq!(abstraction_score(false, Negated), 0);
    }

    #[test]
    fn abstraction_predicate() {
        let (d, _, c) = bar_chart();
        assert!(is_abstraction(d.pmf(), &c).unwrap());
        assert!(!is_abstraction(d.pmf(), &Channel::identity("id", &d).unwrap()).unwrap());
        let ints = make_quantized_range("I", 0.0, 100.0, 1.0).unwrap();
        let canvas = make_uniform_count("V", 1001).unwrap();
        let plot = Channel::quantizer("plot", &ints, &canvas, 1000).unwrap();
        assert!(!is_abstraction(ints.pmf(), &plot).unwrap());
    }

    #[test]
    fn meaningful_predicate() {
        assert!(is_meaningful_visual_abstraction(20.0, 10.0, 8.0, 3.0));
        assert!(!is_meaningful_visual_abstraction(20.0, 20.0, 3.0, 5.0));
        assert!(!is_meaningful_visual_abstraction(20.0, 12.0, 3.0, 5.0));
        assert!(!is_meaningful_visual_abstraction(f64::NAN, 1.0, 3.0, 1.0));
    }
}
