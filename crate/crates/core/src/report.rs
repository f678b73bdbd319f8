//! Scenario analysis and report rendering.
//!
//! Machine formats (json, csv) carry full double precision and write
//! infinities as `"+inf"` / `"-inf"`; the table format rounds to four
//! decimals. The same scenario always yields the same bytes.

use std::fmt::Write as _;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::axis::{combine_space, detect_fork, AbstractionAxis, ForkPoint, Transition};
use crate::costbenefit::{
    compare_routes, evaluate_pipelines, AbstractionJudgment, CostBenefitError, CostBenefitReport, RouteComparison,
    StageMetrics, IDENTITY_TOLERANCE,
};
use crate::scenario::Scenario;

/// Serializes a real, mapping infinities to `"+inf"` / `"-inf"`.
pub fn ext<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_str(&fmt_full(*x))
    }
}

/// Shortest representation that round-trips to the same double.
pub fn fmt_full(x: f64) -> String {
    if x == f64::INFINITY {
        "+inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:?}")
    }
}

fn fmt_table(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        fmt_full(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format '{s}' (expected table, json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnalyzeOptions {
    /// Restrict cost-benefit and route output to one pipeline.
    pub pipeline: Option<String>,
    /// Restrict axis output to one axis.
    pub axis: Option<String>,
}

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown pipeline '{0}'")]
    UnknownPipeline(String),
    #[error("unknown axis '{0}'")]
    UnknownAxis(String),
    #[error("computation failed for '{id}': {source}")]
    Computation {
        id: String,
        #[source]
        source: CostBenefitError,
    },
    #[error("pipeline '{id}' violates the telescoping identity by {residual}")]
    Identity { id: String, residual: f64 },
}

impl AnalysisError {
    /// Whether the failure comes from the request rather than the computation.
    pub fn is_input_error(&self) -> bool {
        matches!(self, AnalysisError::UnknownPipeline(_) | AnalysisError::UnknownAxis(_))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RouteReport {
    pub id: String,
    #[serde(flatten)]
    pub comparison: RouteComparison,
    pub conclusion_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionReport {
    pub from: String,
    pub to: String,
    pub kind: Transition,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxisReport {
    pub id: String,
    pub purpose: String,
    pub nodes: Vec<String>,
    pub transitions: Vec<TransitionReport>,
    pub monotone_decreasing: bool,
}

impl AxisReport {
    pub fn of(axis: &AbstractionAxis) -> Self {
        AxisReport {
            id: axis.id.clone(),
            purpose: axis.purpose.clone(),
            nodes: axis.nodes.iter().map(|n| n.id.clone()).collect(),
            transitions: axis
                .transitions()
                .into_iter()
                .enumerate()
                .map(|(i, kind)| TransitionReport {
                    from: axis.nodes[i].id.clone(),
                    to: axis.nodes[i + 1].id.clone(),
                    kind,
                })
                .collect(),
            monotone_decreasing: axis.is_monotone_decreasing(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceReport {
    pub axes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub scenario: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pipelines: Vec<CostBenefitReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub routes: Vec<RouteReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub judgments: Vec<AbstractionJudgment>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<AxisReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub forks: Vec<ForkPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceReport>,
}

pub fn analyze(scenario: &Scenario, opts: &AnalyzeOptions) -> Result<Report, AnalysisError> {
    if let Some(id) = &opts.pipeline {
        if scenario.pipeline(id).is_none() {
            return Err(AnalysisError::UnknownPipeline(id.clone()));
        }
    }
    let wanted = |id: &str| opts.pipeline.as_deref().is_none_or(|p| p == id);

    let selected: Vec<_> = scenario.pipelines.iter().filter(|p| wanted(p.id())).cloned().collect();
    let mut pipelines = Vec::with_capacity(selected.len());
    for (p, r) in selected.iter().zip(evaluate_pipelines(&selected)) {
        let r = r.map_err(|source| AnalysisError::Computation {
            id: p.id().to_string(),
            source,
        })?;
        if r.telescoping_residual.abs() > IDENTITY_TOLERANCE {
            return Err(AnalysisError::Identity {
                id: r.id,
                residual: r.telescoping_residual,
            });
        }
        pipelines.push(r);
    }

    let mut routes = Vec::new();
    for route in scenario.direct_routes.iter().filter(|r| wanted(&r.pipeline)) {
        let p = scenario
            .pipeline(&route.pipeline)
            .ok_or_else(|| AnalysisError::UnknownPipeline(route.pipeline.clone()))?;
        let comparison = compare_routes(p, &route.stage).map_err(|source| AnalysisError::Computation {
            id: route.id.clone(),
            source,
        })?;
        routes.push(RouteReport {
            id: route.id.clone(),
            conclusion_holds: comparison.conclusion_holds(),
            comparison,
        });
    }

    let axes: Vec<&AbstractionAxis> = match &opts.axis {
        Some(id) => vec![scenario
            .axes
            .iter()
            .find(|a| &a.id == id)
            .ok_or_else(|| AnalysisError::UnknownAxis(id.clone()))?],
        None => scenario.axes.iter().collect(),
    };
    let owned: Vec<AbstractionAxis> = axes.iter().map(|a| (*a).clone()).collect();
    let space = (owned.len() >= 2).then(|| {
        let ids = owned.iter().map(|a| a.id.clone()).collect();
        match combine_space(owned.clone()) {
            Ok(s) => SpaceReport {
                axes: ids,
                points: Some(s.point_count()),
                error: None,
            },
            Err(e) => SpaceReport {
                axes: ids,
                points: None,
                error: Some(e.to_string()),
            },
        }
    });

    Ok(Report {
        scenario: scenario.title().to_string(),
        pipelines,
        routes,
        judgments: scenario.judgments.clone(),
        axes: axes.iter().map(|a| AxisReport::of(a)).collect(),
        forks: detect_fork(&owned),
        space,
    })
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => self.to_table(),
            Format::Json => self.to_json(),
            Format::Csv => self.to_csv(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    /// Cost-benefit rows only: one per stage plus a total per pipeline and route side.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = [
            "section",
            "id",
            "stage",
            "from",
            "to",
            "entropy_in",
            "entropy_out",
            "alphabet_compression",
            "potential_distortion",
            "cost",
            "benefit",
            "ratio",
        ];
        w.write_record(header).expect("in-memory csv");
        let mut emit = |section: &str, r: &CostBenefitReport| {
            for s in &r.stages {
                w.write_record(stage_record(section, &r.id, s)).expect("in-memory csv");
            }
            let total = [
                format!("{section}_total"),
                r.id.clone(),
                String::new(),
                r.stages.first().map(|s| s.from.clone()).unwrap_or_default(),
                r.stages.last().map(|s| s.to.clone()).unwrap_or_default(),
                fmt_full(r.entropy_source),
                fmt_full(r.entropy_sink),
                fmt_full(r.alphabet_compression),
                fmt_full(r.potential_distortion),
                fmt_full(r.cost),
                fmt_full(r.benefit),
                fmt_full(r.ratio),
            ];
            w.write_record(total).expect("in-memory csv");
        };
        for p in &self.pipelines {
            emit("pipeline", p);
        }
        for r in &self.routes {
            emit("route_pipeline", &r.comparison.pipeline);
            emit("route_direct", &r.comparison.direct);
        }
        String::from_utf8(w.into_inner().expect("in-memory csv")).expect("csv is utf-8")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.scenario);
        for p in &self.pipelines {
            let _ = writeln!(out, "\npipeline {}", p.id);
            table_report(&mut out, p);
        }
        for r in &self.routes {
            let c = &r.comparison;
            let _ = writeln!(
                out,
                "\nroute {} (pipeline {} vs direct {})",
                r.id, c.pipeline.id, c.direct.id
            );
            let _ = writeln!(
                out,
                "  ratio pipeline {}  direct {}  -> {:?}",
                fmt_table(c.pipeline.ratio),
                fmt_table(c.direct.ratio),
                c.ordering
            );
            let _ = writeln!(
                out,
                "  AC identity {}  cost premise {}  distortion premise {}  conclusion {}",
                c.compression_identity, c.cost_premise, c.distortion_premise, r.conclusion_holds
            );
            for f in &c.flags {
                let _ = writeln!(out, "  ! {f}");
            }
        }
        if !self.judgments.is_empty() {
            let _ = writeln!(out, "\njudgments");
            for j in &self.judgments {
                let _ = writeln!(
                    out,
                    "  {:<16} A={:<5} B={:<14} score {}",
                    j.id,
                    j.condition_a,
                    format!("{:?}", j.condition_b),
                    j.score
                );
            }
        }
        for a in &self.axes {
            if a.purpose.is_empty() {
                let _ = writeln!(out, "\naxis {}", a.id);
            } else {
                let _ = writeln!(out, "\naxis {} ({})", a.id, a.purpose);
            }
            for t in &a.transitions {
                let _ = writeln!(out, "  {} -> {}: {:?}", t.from, t.to, t.kind);
            }
        }
        for f in &self.forks {
            let _ = writeln!(
                out,
                "\nfork: {} and {} share {} node(s), diverging after '{}'",
                f.axis_a, f.axis_b, f.shared, f.node
            );
        }
        if let Some(s) = &self.space {
            match (&s.points, &s.error) {
                (Some(n), _) => {
                    let _ = writeln!(out, "\nspace [{}]: {n} points", s.axes.join(" x "));
                }
                (None, Some(e)) => {
                    let _ = writeln!(out, "\nspace [{}]: {e}", s.axes.join(" x "));
                }
                _ => {}
            }
        }
        out
    }
}

fn stage_record(section: &str, id: &str, s: &StageMetrics) -> [String; 12] {
    [
        format!("{section}_stage"),
        id.to_string(),
        s.stage.clone(),
        s.from.clone(),
        s.to.clone(),
        fmt_full(s.entropy_in),
        fmt_full(s.entropy_out),
        fmt_full(s.alphabet_compression),
        fmt_full(s.potential_distortion),
        fmt_full(s.cost),
        fmt_full(s.benefit),
        fmt_full(s.ratio),
    ]
}

fn table_report(out: &mut String, r: &CostBenefitReport) {
    let _ = writeln!(
        out,
        "  {:<14} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "stage", "from", "to", "H(in)", "H(out)", "AC", "PD", "cost", "ratio"
    );
    for s in &r.stages {
        let _ = writeln!(
            out,
            "  {:<14} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
            s.stage,
            s.from,
            s.to,
            fmt_table(s.entropy_in),
            fmt_table(s.entropy_out),
            fmt_table(s.alphabet_compression),
            fmt_table(s.potential_distortion),
            fmt_table(s.cost),
            fmt_table(s.ratio)
        );
    }
    let _ = writeln!(
        out,
        "  {:<14} {:>6} {:>6} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "total",
        "",
        "",
        fmt_table(r.entropy_source),
        fmt_table(r.entropy_sink),
        fmt_table(r.alphabet_compression),
        fmt_table(r.potential_distortion),
        fmt_table(r.cost),
        fmt_table(r.ratio)
    );
}
