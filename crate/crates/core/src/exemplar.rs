//! Built-in scenarios for the standard worked cases.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::costbenefit::ConditionB;
use crate::scenario::{
    AlphabetDecl, ChannelDecl, DeterministicDecl, JudgmentDecl, LetterDecl, Meta, PipelineDecl, QuantizerDecl,
    RangeDecl, ReconDecl, RowDecl, ScenarioDoc, StageDecl, StochasticDecl,
};

pub const EXEMPLARS: [&str; 4] = ["barchart", "integer-plot", "random-plotter", "figure-scores"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown exemplar '{0}' (valid: {valid})", valid = EXEMPLARS.join(", "))]
pub struct UnknownExemplar(pub String);

pub fn exemplar(name: &str) -> Result<ScenarioDoc, UnknownExemplar> {
    match name {
        "barchart" => Ok(barchart()),
        "integer-plot" => Ok(integer_plot()),
        "random-plotter" => Ok(random_plotter()),
        "figure-scores" => Ok(figure_scores()),
        _ => Err(UnknownExemplar(name.to_string())),
    }
}

fn titled(title: &str) -> Meta {
    Meta {
        title: Some(title.to_string()),
        ..Meta::default()
    }
}

fn range(id: &str, min: f64, max: f64, step: f64) -> AlphabetDecl {
    AlphabetDecl {
        id: id.into(),
        letters: None,
        uniform_count: None,
        uniform_range: Some(RangeDecl { min, max, step }),
    }
}

fn count(id: &str, n: usize) -> AlphabetDecl {
    AlphabetDecl {
        id: id.into(),
        letters: None,
        uniform_count: Some(n),
        uniform_range: None,
    }
}

fn named(id: &str, letters: &[&str]) -> AlphabetDecl {
    AlphabetDecl {
        id: id.into(),
        letters: Some(
            letters
                .iter()
                .map(|l| LetterDecl {
                    id: l.to_string(),
                    label: None,
                    probability: None,
                })
                .collect(),
        ),
        uniform_count: None,
        uniform_range: None,
    }
}

fn quantizer(id: &str, from: &str, to: &str, pixels: usize) -> ChannelDecl {
    ChannelDecl {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        deterministic: Some(DeterministicDecl {
            map: None,
            quantizer: Some(QuantizerDecl { pixels }),
        }),
        stochastic: None,
    }
}

fn bayes_stage(id: &str, forward: &str, cost: f64) -> StageDecl {
    StageDecl {
        id: id.into(),
        forward: forward.into(),
        recon: ReconDecl::default(),
        cost,
    }
}

fn pipeline(id: &str, stages: &[&str]) -> PipelineDecl {
    PipelineDecl {
        id: id.into(),
        stages: stages.iter().map(|s| s.to_string()).collect(),
        prior: None,
    }
}

/// Values 0.00..=10000.00 plotted as bar heights on a 1000-pixel canvas,
/// followed by a below/above-500-pixel reading task.
fn barchart() -> ScenarioDoc {
    let threshold: BTreeMap<String, String> = (0..=1000)
        .map(|h| (h.to_string(), if h < 500 { "low" } else { "high" }.to_string()))
        .collect();
    ScenarioDoc {
        meta: titled("bar chart of a two-decimal value in [0, 10000]"),
        alphabets: vec![
            range("D", 0.0, 10000.0, 0.01),
            count("V", 1001),
            named("T", &["low", "high"]),
        ],
        channels: vec![
            quantizer("plot", "D", "V", 1000),
            ChannelDecl {
                id: "read".into(),
                from: "V".into(),
                to: "T".into(),
                deterministic: Some(DeterministicDecl {
                    map: Some(threshold),
                    quantizer: None,
                }),
                stochastic: None,
            },
        ],
        stages: vec![bayes_stage("plot", "plot", 1.0), bayes_stage("read", "read", 1.0)],
        pipelines: vec![pipeline("bar-chart", &["plot", "read"])],
        ..ScenarioDoc::default()
    }
}

/// Integers 0..=100 on the same canvas: every value keeps its own bar height.
fn integer_plot() -> ScenarioDoc {
    ScenarioDoc {
        meta: titled("integers in [0, 100] on a 1000-pixel canvas"),
        alphabets: vec![range("D", 0.0, 100.0, 1.0), count("V", 1001)],
        channels: vec![quantizer("plot", "D", "V", 1000)],
        stages: vec![bayes_stage("plot", "plot", 1.0)],
        pipelines: vec![pipeline("integer-plot", &["plot"])],
        ..ScenarioDoc::default()
    }
}

/// A plotter that ignores its input and draws a uniformly random bar height.
fn random_plotter() -> ScenarioDoc {
    let row = vec![1.0 / 1001.0; 1001];
    let rows = BTreeMap::from([("x".to_string(), RowDecl::Dense(row))]);
    ScenarioDoc {
        meta: titled("random bar heights between 0 and 1000 pixels"),
        alphabets: vec![named("D", &["x"]), count("V", 1001)],
        channels: vec![ChannelDecl {
            id: "plot".into(),
            from: "D".into(),
            to: "V".into(),
            deterministic: None,
            stochastic: Some(StochasticDecl { rows }),
        }],
        stages: vec![bayes_stage("plot", "plot", 1.0)],
        pipelines: vec![pipeline("random-plotter", &["plot"])],
        ..ScenarioDoc::default()
    }
}

/// Conditions A and B for eight visualization images and a spreadsheet baseline.
fn figure_scores() -> ScenarioDoc {
    use ConditionB::*;
    let rows: [(&str, bool, ConditionB); 9] = [
        ("a-metro-map", true, Satisfied),
        ("b-pen-and-ink", true, Satisfied),
        ("c-streamlines", true, Satisfied),
        ("d-video-glyphs", true, Satisfied),
        ("e-network", true, NotApplicable),
        ("f-parallel-coords", true, NotApplicable),
        ("g-3d-flow", true, Negated),
        ("h-volume-deform", true, Negated),
        ("spreadsheet", false, NotApplicable),
    ];
    ScenarioDoc {
        meta: titled("abstraction scores for eight visualization images"),
        judgments: rows
            .iter()
            .map(|&(id, a, b)| JudgmentDecl {
                id: id.into(),
                condition_a: a,
                condition_b: b,
                score: None,
                point_of_view: None,
            })
            .collect(),
        ..ScenarioDoc::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn every_exemplar_loads() {
        for name in EXEMPLARS {
            let doc = exemplar(name).unwrap();
            Scenario::from_doc(doc).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_name_lists_valid_ones() {
        let e = exemplar("pie").unwrap_err();
        assert!(e.to_string().contains("barchart, integer-plot"));
    }

    #[test]
    fn barchart_alphabet_sizes() {
        let s = Scenario::from_doc(exemplar("barchart").unwrap()).unwrap();
        assert_eq!(s.alphabet("D").unwrap().len(), 1_000_001);
        assert_eq!(s.alphabet("V").unwrap().len(), 1001);
    }
}
