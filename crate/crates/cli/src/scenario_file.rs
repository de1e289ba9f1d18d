//! TOML scenario files.
//!
//! ```toml
//! [graph]
//! edges = [["SA1", "SA2"], ["SA1", "SA3"]]
//!
//! [[graph.groups]]
//! name = "SA"
//! members = ["SA1", "SA2", "SA3"]
//!
//! [[flows]]
//! source = "SA1"
//! rate = 4.0          # packets/s
//! packet_size = 512   # bytes
//!
//! [link]
//! rate = 2e6          # bits/s
//!
//! [queue]
//! capacity = 64       # packets
//!
//! [run]
//! duration = 800.0    # seconds
//! seed = 1
//! discipline = "pop-aware"
//! replications = 5
//! ```
//!
//! Unknown keys are rejected. Names in `edges` and `flows` must refer to
//! group members; those errors carry the line and column of the name.

use std::collections::BTreeSet;
use std::ops::Range;
use std::path::{Path, PathBuf};

use popsched::{Discipline, FlowSpec, Scenario, SocialGraph};
use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub graph: GraphSection,
    pub flows: Vec<FlowSection>,
    pub link: LinkSection,
    pub queue: QueueSection,
    pub run: RunSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSection {
    #[serde(default)]
    pub edges: Vec<(Spanned<String>, Spanned<String>)>,
    pub groups: Vec<GroupSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub name: Spanned<String>,
    pub members: Vec<Spanned<String>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    pub source: Spanned<String>,
    pub rate: f64,
    pub packet_size: u32,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub rate: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QueueSection {
    pub capacity: usize,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub duration: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_discipline")]
    pub discipline: Spanned<String>,
    #[serde(default = "default_replications")]
    pub replications: usize,
}

fn default_seed() -> u64 {
    1
}

fn default_discipline() -> Spanned<String> {
    Spanned::new(0..0, Discipline::PopAware.as_str().to_owned())
}

fn default_replications() -> usize {
    5
}

/// 1-based line and column of byte offset `at` in `src`.
fn line_col(src: &str, at: usize) -> (usize, usize) {
    let at = at.min(src.len());
    let before = &src[..at];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(at, |nl| at - nl - 1) + 1;
    (line, column)
}

/// A parsed file together with its text, so later checks can point at
/// the offending spot.
pub struct Loaded {
    pub path: PathBuf,
    pub source: String,
    pub file: ScenarioFile,
}

impl Loaded {
    fn error_at(&self, span: Range<usize>, message: String) -> CliError {
        if span.is_empty() && span.start == 0 {
            return CliError::Validation(format!("{}: {message}", self.path.display()));
        }
        let (line, column) = line_col(&self.source, span.start);
        CliError::Validation(format!(
            "{}:{line}:{column}: {message}",
            self.path.display()
        ))
    }

    /// Builds the scenario and checks it, naming the field at fault.
    pub fn to_scenario(&self) -> Result<Scenario, CliError> {
        let f = &self.file;
        let mut graph = SocialGraph::new();
        let mut group_names = BTreeSet::new();
        for g in &f.graph.groups {
            if !group_names.insert(g.name.get_ref().as_str()) {
                return Err(self.error_at(
                    g.name.span(),
                    format!("duplicate group `{}`", g.name.get_ref()),
                ));
            }
            let id = graph.add_group(g.name.get_ref());
            for m in &g.members {
                graph
                    .add_node(m.get_ref(), id)
                    .map_err(|e| self.error_at(m.span(), e.to_string()))?;
            }
        }
        for (a, b) in &f.graph.edges {
            for end in [a, b] {
                if graph.lookup(end.get_ref()).is_err() {
                    return Err(self.error_at(
                        end.span(),
                        format!("edge names unknown node `{}`", end.get_ref()),
                    ));
                }
            }
            graph
                .add_edge_by_name(a.get_ref(), b.get_ref())
                .map_err(|e| self.error_at(a.span(), e.to_string()))?;
        }
        let mut flows = Vec::with_capacity(f.flows.len());
        for (i, fl) in f.flows.iter().enumerate() {
            let source = graph.lookup(fl.source.get_ref()).map_err(|_| {
                self.error_at(
                    fl.source.span(),
                    format!("flows[{i}].source: unknown node `{}`", fl.source.get_ref()),
                )
            })?;
            if let Err(e) = graph.degree_centrality(source) {
                return Err(self.error_at(fl.source.span(), format!("flows[{i}].source: {e}")));
            }
            flows.push(FlowSpec {
                source,
                rate: fl.rate,
                packet_size: fl.packet_size,
            });
        }
        let discipline: Discipline = f.run.discipline.get_ref().parse().map_err(|e: String| {
            self.error_at(f.run.discipline.span(), format!("run.discipline: {e}"))
        })?;
        let scenario = Scenario {
            graph,
            flows,
            link_rate: f.link.rate,
            queue_capacity: f.queue.capacity,
            duration: f.run.duration,
            discipline,
            seed: f.run.seed,
            replications: f.run.replications,
        };
        scenario
            .validate()
            .map_err(|e| CliError::Validation(format!("{}: {e}", self.path.display())))?;
        Ok(scenario)
    }
}

pub fn parse(path: &Path, source: String) -> Result<Loaded, CliError> {
    let file: ScenarioFile = toml::from_str(&source).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(&source, s.start));
        CliError::Parse {
            path: path.to_owned(),
            line,
            column,
            message: e.message().replace('\n', " "),
        }
    })?;
    Ok(Loaded {
        path: path.to_owned(),
        source,
        file,
    })
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let source = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_owned(),
        source,
    })?;
    parse(path, source)
}

fn unspanned<T>(v: T) -> Spanned<T> {
    Spanned::new(0..0, v)
}

impl ScenarioFile {
    /// File form of an in-memory scenario.
    pub fn from_scenario(s: &Scenario) -> Self {
        let g = &s.graph;
        let groups = g
            .groups()
            .map(|grp| GroupSection {
                name: unspanned(g.group_name(grp).to_owned()),
                members: g
                    .members(grp)
                    .iter()
                    .map(|&a| unspanned(g.name(a).to_owned()))
                    .collect(),
            })
            .collect();
        let edges = g
            .edges()
            .map(|(a, b)| {
                (
                    unspanned(g.name(a).to_owned()),
                    unspanned(g.name(b).to_owned()),
                )
            })
            .collect();
        ScenarioFile {
            graph: GraphSection { edges, groups },
            flows: s
                .flows
                .iter()
                .map(|f| FlowSection {
                    source: unspanned(g.name(f.source).to_owned()),
                    rate: f.rate,
                    packet_size: f.packet_size,
                })
                .collect(),
            link: LinkSection { rate: s.link_rate },
            queue: QueueSection {
                capacity: s.queue_capacity,
            },
            run: RunSection {
                duration: s.duration,
                seed: s.seed,
                discipline: unspanned(s.discipline.as_str().to_owned()),
                replications: s.replications,
            },
        }
    }

    /// TOML text with the edge list wrapped a few pairs per line.
    pub fn to_toml(&self) -> String {
        let mut bare = self.clone();
        bare.graph.edges.clear();
        let text = toml::to_string(&bare).expect("scenario serializes");
        let quote = |s: &Spanned<String>| toml::Value::String(s.get_ref().clone()).to_string();
        let pairs: Vec<String> = self
            .graph
            .edges
            .iter()
            .map(|(a, b)| format!("[{}, {}]", quote(a), quote(b)))
            .collect();
        let mut block = String::from("edges = [\n");
        for chunk in pairs.chunks(6) {
            block.push_str("    ");
            block.push_str(&chunk.join(", "));
            block.push_str(",\n");
        }
        block.push(']');
        text.replacen("edges = []", &block, 1)
    }
}
