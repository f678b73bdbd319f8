//! Scenario files: a JSON description of alphabets, channels, stages,
//! pipelines, direct routes, judgments and axes.
//!
//! Loading resolves every cross-reference and runs every module-level
//! validation; errors name the offending element by its path in the file,
//! e.g. `channels[0].from`.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::alphabet::{Alphabet, Letter, Letters, Pmf};
use crate::axis::{build_axis, AbstractionAxis, NodeKind, RepresentationNode};
use crate::channel::{Channel, ReconstructionChannel};
use crate::costbenefit::{AbstractionJudgment, ConditionB, Pipeline, PointOfView, Recon, Stage};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl ToString) -> ScenarioError {
    ScenarioError::Invalid {
        path: path.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_of_view: Option<PointOfView>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LetterDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probability: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeDecl {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

/// Exactly one of `letters`, `uniform_count` or `uniform_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphabetDecl {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub letters: Option<Vec<LetterDecl>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_range: Option<RangeDecl>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantizerDecl {
    pub pixels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicDecl {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quantizer: Option<QuantizerDecl>,
}

/// A stochastic row: dense in target-letter order, or sparse by target letter id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RowDecl {
    Dense(Vec<f64>),
    Sparse(BTreeMap<String, f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StochasticDecl {
    pub rows: BTreeMap<String, RowDecl>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelDecl {
    pub id: String,
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deterministic: Option<DeterministicDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stochastic: Option<StochasticDecl>,
}

/// `"bayes"`, a channel id, or `{"pmf": <alphabet id>}` for a supplied reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReconDecl {
    Named(String),
    Supplied { pmf: String },
}

impl Default for ReconDecl {
    fn default() -> Self {
        ReconDecl::Named("bayes".to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageDecl {
    pub id: String,
    pub forward: String,
    #[serde(default)]
    pub recon: ReconDecl,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineDecl {
    pub id: String,
    pub stages: Vec<String>,
    /// Alphabet whose pmf is the prior; defaults to the first stage's input alphabet.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectRouteDecl {
    pub id: String,
    pub stage: String,
    pub pipeline: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JudgmentDecl {
    pub id: String,
    pub condition_a: bool,
    pub condition_b: ConditionB,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_of_view: Option<PointOfView>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDecl {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub information: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisDecl {
    pub id: String,
    #[serde(default)]
    pub purpose: String,
    pub nodes: Vec<NodeDecl>,
}

/// The file-level document, as written.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(default)]
    pub meta: Meta,
    #[serde(default)]
    pub alphabets: Vec<AlphabetDecl>,
    #[serde(default)]
    pub channels: Vec<ChannelDecl>,
    #[serde(default)]
    pub stages: Vec<StageDecl>,
    #[serde(default)]
    pub pipelines: Vec<PipelineDecl>,
    #[serde(default)]
    pub direct_routes: Vec<DirectRouteDecl>,
    #[serde(default)]
    pub judgments: Vec<JudgmentDecl>,
    #[serde(default)]
    pub axes: Vec<AxisDecl>,
}

impl ScenarioDoc {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario documents always serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
pub struct DirectRoute {
    pub id: String,
    pub stage: Stage,
    pub pipeline: String,
}

/// A fully resolved and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub alphabets: Vec<Alphabet>,
    pub channels: Vec<Channel>,
    pub stages: Vec<Stage>,
    pub pipelines: Vec<Pipeline>,
    pub direct_routes: Vec<DirectRoute>,
    pub judgments: Vec<AbstractionJudgment>,
    pub axes: Vec<AbstractionAxis>,
}

impl Scenario {
    pub fn title(&self) -> &str {
        self.doc.meta.title.as_deref().unwrap_or("untitled")
    }

    pub fn alphabet(&self, id: &str) -> Option<&Alphabet> {
        self.alphabets.iter().find(|a| a.id() == id)
    }

    pub fn pipeline(&self, id: &str) -> Option<&Pipeline> {
        self.pipelines.iter().find(|p| p.id() == id)
    }

    pub fn to_json(&self) -> String {
        self.doc.to_json()
    }

    pub fn from_json_str(text: &str) -> Result<Self, ScenarioError> {
        let doc: ScenarioDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        Scenario::from_doc(doc)
    }

    pub fn from_doc(doc: ScenarioDoc) -> Result<Self, ScenarioError> {
        Resolver::default().resolve(doc)
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Scenario::from_json_str(&text)
}

fn index_ids<'a>(
    section: &str,
    ids: impl Iterator<Item = &'a String>,
) -> Result<HashMap<String, usize>, ScenarioError> {
    let mut out = HashMap::new();
    for (i, id) in ids.enumerate() {
        if out.insert(id.clone(), i).is_some() {
            return Err(invalid(format!("{section}[{i}].id"), format!("duplicate id '{id}'")));
        }
    }
    Ok(out)
}

fn lookup(index: &HashMap<String, usize>, kind: &str, id: &str, path: String) -> Result<usize, ScenarioError> {
    index
        .get(id)
        .copied()
        .ok_or_else(|| invalid(path, format!("unknown {kind} '{id}'")))
}

#[derive(Default)]
struct Resolver {
    alphabets: Vec<Alphabet>,
    alphabet_ids: HashMap<String, usize>,
    channels: Vec<Channel>,
    channel_ids: HashMap<String, usize>,
    stages: Vec<Stage>,
    stage_ids: HashMap<String, usize>,
}

impl Resolver {
    fn resolve(mut self, doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
        self.alphabet_ids = index_ids("alphabets", doc.alphabets.iter().map(|a| &a.id))?;
        for (i, decl) in doc.alphabets.iter().enumerate() {
            let a = alphabet(decl, &format!("alphabets[{i}]"))?;
            self.alphabets.push(a);
        }

        self.channel_ids = index_ids("channels", doc.channels.iter().map(|c| &c.id))?;
        for (i, decl) in doc.channels.iter().enumerate() {
            let c = self.channel(decl, &format!("channels[{i}]"))?;
            self.channels.push(c);
        }

        self.stage_ids = index_ids("stages", doc.stages.iter().map(|s| &s.id))?;
        for (i, decl) in doc.stages.iter().enumerate() {
            let s = self.stage(decl, &format!("stages[{i}]"))?;
            self.stages.push(s);
        }

        let pipeline_ids = index_ids("pipelines", doc.pipelines.iter().map(|p| &p.id))?;
        let mut pipelines = Vec::with_capacity(doc.pipelines.len());
        for (i, decl) in doc.pipelines.iter().enumerate() {
            pipelines.push(self.pipeline(decl, &format!("pipelines[{i}]"))?);
        }

        index_ids("direct_routes", doc.direct_routes.iter().map(|r| &r.id))?;
        let mut direct_routes = Vec::with_capacity(doc.direct_routes.len());
        for (i, decl) in doc.direct_routes.iter().enumerate() {
            let path = format!("direct_routes[{i}]");
            let s = lookup(&self.stage_ids, "stage", &decl.stage, format!("{path}.stage"))?;
            let p = lookup(&pipeline_ids, "pipeline", &decl.pipeline, format!("{path}.pipeline"))?;
            let (stage, pipeline) = (&self.stages[s], &pipelines[p]);
            let endpoints = [
                ("data", &pipeline.source().letters, &stage.forward().from().letters),
                ("task", &pipeline.sink().letters, &stage.forward().to().letters),
            ];
            for (end, a, b) in endpoints {
                if !crate::alphabet::same_letters(a, b) {
                    return Err(invalid(
                        format!("{path}.stage"),
                        format!(
                            "direct stage '{}' does not share the {end} alphabet of pipeline '{}'",
                            decl.stage, decl.pipeline
                        ),
                    ));
                }
            }
            direct_routes.push(DirectRoute {
                id: decl.id.clone(),
                stage: stage.clone(),
                pipeline: decl.pipeline.clone(),
            });
        }

        index_ids("judgments", doc.judgments.iter().map(|j| &j.id))?;
        let mut judgments = Vec::with_capacity(doc.judgments.len());
        for (i, decl) in doc.judgments.iter().enumerate() {
            let j = AbstractionJudgment::new(
                decl.id.clone(),
                decl.condition_a,
                decl.condition_b,
                decl.point_of_view.clone(),
            );
            if let Some(declared) = decl.score {
                if declared != j.score {
                    return Err(invalid(
                        format!("judgments[{i}].score"),
                        format!("declared score {declared} disagrees with computed score {}", j.score),
                    ));
                }
            }
            judgments.push(j);
        }

        index_ids("axes", doc.axes.iter().map(|a| &a.id))?;
        let mut axes = Vec::with_capacity(doc.axes.len());
        for (i, decl) in doc.axes.iter().enumerate() {
            axes.push(self.axis(decl, &format!("axes[{i}]"))?);
        }

        Ok(Scenario {
            doc,
            alphabets: self.alphabets,
            channels: self.channels,
            stages: self.stages,
            pipelines,
            direct_routes,
            judgments,
            axes,
        })
    }

    fn alphabet_ref(&self, id: &str, path: String) -> Result<&Alphabet, ScenarioError> {
        Ok(&self.alphabets[lookup(&self.alphabet_ids, "alphabet", id, path)?])
    }

    fn channel(&self, decl: &ChannelDecl, path: &str) -> Result<Channel, ScenarioError> {
        let from = self.alphabet_ref(&decl.from, format!("{path}.from"))?;
        let to = self.alphabet_ref(&decl.to, format!("{path}.to"))?;
        let result = match (&decl.deterministic, &decl.stochastic) {
            (Some(det), None) => {
                let dpath = format!("{path}.deterministic");
                match (&det.map, &det.quantizer) {
                    (Some(map), None) => {
                        let images = letter_map(map, from, to, &format!("{dpath}.map"))?;
                        Channel::deterministic(&decl.id, from, to, images)
                    }
                    (None, Some(q)) => Channel::quantizer(&decl.id, from, to, q.pixels),
                    _ => return Err(invalid(dpath, "expected exactly one of 'map' or 'quantizer'")),
                }
            }
            (None, Some(st)) => {
                let rows = stochastic_rows(st, from, to, &format!("{path}.stochastic.rows"))?;
                Channel::stochastic(&decl.id, from, to, rows)
            }
            _ => return Err(invalid(path, "expected exactly one of 'deterministic' or 'stochastic'")),
        };
        result.map_err(|e| invalid(path, e))
    }

    fn stage(&self, decl: &StageDecl, path: &str) -> Result<Stage, ScenarioError> {
        let f = lookup(&self.channel_ids, "channel", &decl.forward, format!("{path}.forward"))?;
        let forward = self.channels[f].clone();
        let recon = match &decl.recon {
            ReconDecl::Named(name) if name == "bayes" => Recon::Bayes,
            ReconDecl::Named(name) => {
                let r = lookup(&self.channel_ids, "channel", name, format!("{path}.recon"))?;
                let rc = ReconstructionChannel::new(self.channels[r].clone());
                rc.check_orientation(&forward)
                    .map_err(|e| invalid(format!("{path}.recon"), e))?;
                Recon::Channel(rc)
            }
            ReconDecl::Supplied { pmf } => {
                let a = self.alphabet_ref(pmf, format!("{path}.recon.pmf"))?;
                Recon::Supplied(a.pmf().clone())
            }
        };
        Stage::new(&decl.id, forward, recon, decl.cost).map_err(|e| invalid(path, e))
    }

    fn pipeline(&self, decl: &PipelineDecl, path: &str) -> Result<Pipeline, ScenarioError> {
        if decl.stages.is_empty() {
            return Err(invalid(format!("{path}.stages"), "pipeline has no stages"));
        }
        let mut stages = Vec::with_capacity(decl.stages.len());
        for (j, sid) in decl.stages.iter().enumerate() {
            let s = lookup(&self.stage_ids, "stage", sid, format!("{path}.stages[{j}]"))?;
            stages.push(self.stages[s].clone());
        }
        let prior = match &decl.prior {
            Some(id) => self.alphabet_ref(id, format!("{path}.prior"))?.pmf().clone(),
            None => {
                let first = &stages[0].forward().from().alphabet;
                self.alphabet_ref(first, format!("{path}.stages[0]"))?.pmf().clone()
            }
        };
        Pipeline::new(&decl.id, stages, prior).map_err(|e| invalid(path, e))
    }

    fn axis(&self, decl: &AxisDecl, path: &str) -> Result<AbstractionAxis, ScenarioError> {
        let mut nodes = Vec::with_capacity(decl.nodes.len());
        for (j, n) in decl.nodes.iter().enumerate() {
            let npath = format!("{path}.nodes[{j}]");
            let node = match (&n.alphabet, n.information) {
                (Some(aid), declared) => {
                    let a = self.alphabet_ref(aid, format!("{npath}.alphabet"))?;
                    let h = a.pmf().entropy().map_err(|e| invalid(format!("{npath}.alphabet"), e))?;
                    RepresentationNode::new(&n.id, n.kind, declared.unwrap_or(h), n.attributes.iter().cloned())
                        .with_alphabet(aid, h)
                        .map_err(|e| invalid(format!("{npath}.information"), e))?
                }
                (None, Some(info)) => RepresentationNode::new(&n.id, n.kind, info, n.attributes.iter().cloned()),
                (None, None) => {
                    return Err(invalid(npath, "node needs 'information' or 'alphabet'"));
                }
            };
            nodes.push(node);
        }
        build_axis(&decl.id, nodes, &decl.purpose).map_err(|e| invalid(path, e))
    }
}

fn alphabet(decl: &AlphabetDecl, path: &str) -> Result<Alphabet, ScenarioError> {
    let sources = [
        decl.letters.is_some(),
        decl.uniform_count.is_some(),
        decl.uniform_range.is_some(),
    ];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(invalid(
            path,
            "expected exactly one of 'letters', 'uniform_count' or 'uniform_range'",
        ));
    }
    if let Some(n) = decl.uniform_count {
        let letters = Letters::indexed(n).map_err(|e| invalid(format!("{path}.uniform_count"), e))?;
        return Ok(Alphabet::with_pmf(&decl.id, Pmf::uniform(Arc::new(letters))));
    }
    if let Some(r) = decl.uniform_range {
        let letters = Letters::grid(r.min, r.max, r.step).map_err(|e| invalid(format!("{path}.uniform_range"), e))?;
        return Ok(Alphabet::with_pmf(&decl.id, Pmf::uniform(Arc::new(letters))));
    }
    let decls = decl.letters.as_ref().expect("checked above");
    let lpath = format!("{path}.letters");
    let letters = Letters::named(
        decls
            .iter()
            .map(|l| Letter {
                id: l.id.clone(),
                label: l.label.clone(),
            })
            .collect(),
    )
    .map_err(|e| invalid(&lpath, e))?;
    let given = decls.iter().filter(|l| l.probability.is_some()).count();
    if given == 0 {
        return Ok(Alphabet::with_pmf(&decl.id, Pmf::uniform(Arc::new(letters))));
    }
    if given != decls.len() {
        let i = decls.iter().position(|l| l.probability.is_none()).unwrap_or(0);
        return Err(invalid(format!("{lpath}[{i}].probability"), "missing probability"));
    }
    let masses = decls.iter().map(|l| l.probability.unwrap_or(0.0)).collect();
    let a = Alphabet::from_raw(&decl.id, letters, masses);
    a.validate().map_err(|v| {
        let msg = v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ");
        invalid(&lpath, msg)
    })?;
    Ok(a)
}

fn letter_map(
    map: &BTreeMap<String, String>,
    from: &Alphabet,
    to: &Alphabet,
    path: &str,
) -> Result<Vec<usize>, ScenarioError> {
    let mut images = vec![usize::MAX; from.len()];
    for (k, v) in map {
        let i = from.letters().position(k).ok_or_else(|| {
            invalid(
                format!("{path}.{k}"),
                format!("unknown letter '{k}' in '{}'", from.id()),
            )
        })?;
        images[i] = to
            .letters()
            .position(v)
            .ok_or_else(|| invalid(format!("{path}.{k}"), format!("unknown letter '{v}' in '{}'", to.id())))?;
    }
    if let Some(i) = images.iter().position(|&m| m == usize::MAX) {
        return Err(invalid(path, format!("no image for letter '{}'", from.letters().id(i))));
    }
    Ok(images)
}

fn stochastic_rows(
    decl: &StochasticDecl,
    from: &Alphabet,
    to: &Alphabet,
    path: &str,
) -> Result<Vec<Vec<(usize, f64)>>, ScenarioError> {
    let mut rows: Vec<Option<Vec<(usize, f64)>>> = vec![None; from.len()];
    for (k, row) in &decl.rows {
        let rpath = format!("{path}.{k}");
        let i = from
            .letters()
            .position(k)
            .ok_or_else(|| invalid(&rpath, format!("unknown letter '{k}' in '{}'", from.id())))?;
        let parsed = match row {
            RowDecl::Dense(values) => {
                if values.len() != to.len() {
                    return Err(invalid(
                        &rpath,
                        format!("row has {} entries, expected {}", values.len(), to.len()),
                    ));
                }
                values.iter().copied().enumerate().collect()
            }
            RowDecl::Sparse(entries) => entries
                .iter()
                .map(|(c, &p)| {
                    to.letters().position(c).map(|j| (j, p)).ok_or_else(|| {
                        invalid(format!("{rpath}.{c}"), format!("unknown letter '{c}' in '{}'", to.id()))
                    })
                })
                .collect::<Result<_, _>>()?,
        };
        rows[i] = Some(parsed);
    }
    rows.into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| invalid(path, format!("no row for letter '{}'", from.letters().id(i)))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn err(json: &str) -> String {
        Scenario::from_json_str(json).unwrap_err().to_string()
    }

    #[test]
    fn minimal_scenario_loads() {
        let s = Scenario::from_json_str(
            r#"{
                "alphabets": [
                    {"id": "D", "letters": [{"id": "a", "probability": 0.25}, {"id": "b", "probability": 0.75}]},
                    {"id": "V", "uniform_count": 1}
                ],
                "channels": [{"id": "c", "from": "D", "to": "V", "deterministic": {"map": {"a": "0", "b": "0"}}}],
                "stages": [{"id": "s", "forward": "c", "cost": 1}],
                "pipelines": [{"id": "p", "stages": ["s"]}]
            }"#,
        )
        .unwrap();
        assert_eq!(s.pipelines.len(), 1);
        assert_eq!(s.alphabet("D").unwrap().pmf().masses(), &[0.25, 0.75]);
        assert!(matches!(s.stages[0].recon(), Recon::Bayes));
    }

    #[test]
    fn unknown_alphabet_names_its_path() {
        let m = err(r#"{"alphabets": [{"id": "D", "uniform_count": 2}],
                       "channels": [{"id": "c", "from": "X", "to": "D", "deterministic": {"map": {}}}]}"#);
        assert!(m.starts_with("channels[0].from:"), "{m}");
        assert!(m.contains("'X'"), "{m}");
    }

    #[test]
    fn bad_mass_sum_is_rejected() {
        let m = err(
            r#"{"alphabets": [{"id": "D", "letters": [{"id": "a", "probability": 0.5}, {"id": "b", "probability": 0.48}]}]}"#,
        );
        assert!(m.starts_with("alphabets[0].letters:"), "{m}");
        assert!(m.contains("mass sum 0.98"), "{m}");
    }

    #[test]
    fn alphabet_needs_one_source() {
        let m = err(
            r#"{"alphabets": [{"id": "D", "uniform_count": 2, "uniform_range": {"min": 0, "max": 1, "step": 1}}]}"#,
        );
        assert!(m.starts_with("alphabets[0]:"), "{m}");
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        let m = err(r#"{"alphabets": [{"id": "D", "uniform_count": 2}, {"id": "D", "uniform_count": 3}]}"#);
        assert!(m.starts_with("alphabets[1].id:"), "{m}");
    }

    #[test]
    fn incomplete_map_is_rejected() {
        let m = err(r#"{"alphabets": [{"id": "D", "uniform_count": 2}],
                       "channels": [{"id": "c", "from": "D", "to": "D", "deterministic": {"map": {"0": "1"}}}]}"#);
        assert!(m.starts_with("channels[0].deterministic.map:"), "{m}");
        assert!(m.contains("no image for letter '1'"), "{m}");
    }

    #[test]
    fn stochastic_rows_dense_and_sparse() {
        let s = Scenario::from_json_str(
            r#"{"alphabets": [{"id": "D", "uniform_count": 2}, {"id": "V", "letters": [{"id": "x"}, {"id": "y"}]}],
                "channels": [{"id": "c", "from": "D", "to": "V",
                              "stochastic": {"rows": {"0": [0.5, 0.5], "1": {"y": 1.0}}}}]}"#,
        )
        .unwrap();
        assert_eq!(s.channels[0].row(1), vec![(1, 1.0)]);
        let m = err(r#"{"alphabets": [{"id": "D", "uniform_count": 2}],
                       "channels": [{"id": "c", "from": "D", "to": "D", "stochastic": {"rows": {"0": [0.5, 0.4], "1": [0, 1]}}}]}"#);
        assert!(m.starts_with("channels[0]:") && m.contains("sums to"), "{m}");
    }

    #[test]
    fn declared_score_must_agree() {
        let m = err(r#"{"judgments": [{"id": "g", "condition_a": true, "condition_b": "negated", "score": 2}]}"#);
        assert!(m.starts_with("judgments[0].score:"), "{m}");
        let ok = Scenario::from_json_str(
            r#"{"judgments": [{"id": "g", "condition_a": true, "condition_b": "na", "score": 2}]}"#,
        )
        .unwrap();
        assert_eq!(ok.judgments[0].score, 2);
    }

    #[test]
    fn recon_orientation_is_checked() {
        let m = err(
            r#"{"alphabets": [{"id": "D", "uniform_count": 2}, {"id": "V", "uniform_count": 1}],
                       "channels": [{"id": "c", "from": "D", "to": "V", "deterministic": {"map": {"0": "0", "1": "0"}}}],
                       "stages": [{"id": "s", "forward": "c", "recon": "c", "cost": 1}]}"#,
        );
        assert!(m.starts_with("stages[0].recon:"), "{m}");
    }

    #[test]
    fn axis_node_information_from_alphabet() {
        let s = Scenario::from_json_str(
            r#"{"alphabets": [{"id": "A", "uniform_count": 8}],
                "axes": [{"id": "x", "nodes": [
                    {"id": "n1", "kind": "data", "alphabet": "A"},
                    {"id": "n2", "kind": "visual", "information": 1.0}]}]}"#,
        )
        .unwrap();
        assert!((s.axes[0].nodes[0].information - 3.0).abs() < 1e-12);
        let m = err(r#"{"alphabets": [{"id": "A", "uniform_count": 8}],
                "axes": [{"id": "x", "nodes": [
                    {"id": "n1", "kind": "data", "alphabet": "A", "information": 2.0},
                    {"id": "n2", "kind": "visual", "information": 1.0}]}]}"#);
        assert!(m.starts_with("axes[0].nodes[0].information:"), "{m}");
    }

    #[test]
    fn unknown_fields_are_parse_errors() {
        assert!(err(r#"{"alphabetz": []}"#).starts_with("parse error"));
    }
}
