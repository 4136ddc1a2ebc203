//! Instance files.
//!
//! ```toml
//! objective = "detection"      # or "isolation"
//! lambda = 1
//! k = 2
//! sigma = 1
//! sensors = ["2", "3"]         # or "all"
//! nodes = ["1", "2", "3", "4"] # optional; otherwise taken from the edges
//! edges = [["1", "2"], ["2", "3"], ["3", "4"]]
//! targets = "all-edges"        # "all-nodes", or { nodes = [...], edges = [[a, b], ...] }
//! ```

use std::collections::HashSet;
use std::path::Path;

use dutycycle::coverage::{build, CoverageGraph, Objective};
use dutycycle::graph::{GraphBuilder, NetworkGraph, NodeId, Target};
use dutycycle::schedule::ProblemInstance;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensors: Option<Selection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<TargetSpec>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Selection {
    Keyword(String),
    Names(Vec<String>),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum TargetSpec {
    Keyword(String),
    Explicit {
        #[serde(default)]
        nodes: Vec<String>,
        #[serde(default)]
        edges: Vec<(String, String)>,
    },
}

/// A resolved instance. Slot counts and range stay optional until a command
/// combines them with its flags.
#[derive(Clone, Debug)]
pub struct Instance {
    pub graph: NetworkGraph,
    pub sensors: Vec<NodeId>,
    pub targets: Vec<Target>,
    pub objective: Objective,
    pub lambda: usize,
    pub k: Option<usize>,
    pub sigma: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub k: Option<usize>,
    pub sigma: Option<usize>,
    pub lambda: Option<usize>,
    pub objective: Option<Objective>,
}

impl InstanceFile {
    pub fn parse(text: &str, origin: &str) -> Result<Self, Failure> {
        toml::from_str(text).map_err(|e| Failure::Input(format!("{origin}: {e}")))
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("instance files always serialize")
    }

    /// Plain graph with every node a sensor and a target.
    pub fn from_graph(g: &NetworkGraph) -> Self {
        Self {
            objective: Some("detection".into()),
            lambda: Some(1),
            sensors: Some(Selection::Keyword("all".into())),
            nodes: g.nodes().map(|v| g.name(v).to_string()).collect(),
            edges: g.edges().map(|(_, a, b)| (g.name(a).to_string(), g.name(b).to_string())).collect(),
            targets: Some(TargetSpec::Keyword("all-nodes".into())),
            ..Self::default()
        }
    }

    pub fn resolve(&self) -> Result<Instance, Failure> {
        let mut unknown: Vec<String> = Vec::new();
        let mut builder = GraphBuilder::new();
        for name in &self.nodes {
            check_token(name)?;
            builder.node(name);
        }
        let declared: HashSet<&str> = self.nodes.iter().map(String::as_str).collect();
        let lookup = |builder: &mut GraphBuilder, name: &str, unknown: &mut Vec<String>| -> Option<NodeId> {
            if !declared.is_empty() && !declared.contains(name) {
                unknown.push(name.to_string());
                return None;
            }
            Some(builder.node(name))
        };
        for (a, b) in &self.edges {
            check_token(a)?;
            check_token(b)?;
            let (Some(x), Some(y)) = (lookup(&mut builder, a, &mut unknown), lookup(&mut builder, b, &mut unknown))
            else {
                continue;
            };
            builder.edge_between(x, y).map_err(|e| Failure::Input(format!("edge [\"{a}\", \"{b}\"]: {e}")))?;
        }
        let graph = builder.build();
        if graph.node_count() == 0 {
            return Err(Failure::Input("the instance has no nodes".into()));
        }
        let find = |name: &str, unknown: &mut Vec<String>| -> Option<NodeId> {
            let id = graph.node_id(name).ok();
            if id.is_none() {
                unknown.push(name.to_string());
            }
            id
        };

        let sensors = match &self.sensors {
            None => graph.nodes().collect(),
            Some(Selection::Keyword(w)) if w == "all" => graph.nodes().collect(),
            Some(Selection::Keyword(w)) => {
                return Err(Failure::Input(format!("sensors: expected \"all\" or a list of names, got \"{w}\"")))
            }
            Some(Selection::Names(names)) => names.iter().filter_map(|n| find(n, &mut unknown)).collect(),
        };
        let targets = match &self.targets {
            None => graph.all_node_targets(),
            Some(TargetSpec::Keyword(w)) if w == "all-nodes" => graph.all_node_targets(),
            Some(TargetSpec::Keyword(w)) if w == "all-edges" => graph.all_edge_targets(),
            Some(TargetSpec::Keyword(w)) => {
                return Err(Failure::Input(format!(
                    "targets: expected \"all-nodes\", \"all-edges\" or a table, got \"{w}\""
                )))
            }
            Some(TargetSpec::Explicit { nodes, edges }) => {
                let mut t: Vec<Target> = nodes.iter().filter_map(|n| find(n, &mut unknown)).map(Target::Node).collect();
                for (a, b) in edges {
                    let (Some(x), Some(y)) = (find(a, &mut unknown), find(b, &mut unknown)) else {
                        continue;
                    };
                    let e = graph
                        .edge_id(x, y)
                        .map_err(|_| Failure::Input(format!("target edge [\"{a}\", \"{b}\"] is not an edge")))?;
                    t.push(Target::Edge(e));
                }
                t
            }
        };
        if !unknown.is_empty() {
            unknown.dedup();
            return Err(Failure::Input(format!("unknown node names: {}", unknown.join(", "))));
        }
        let objective = match &self.objective {
            None => Objective::Detection,
            Some(o) => o.parse().map_err(|e| Failure::Input(format!("objective: {e}")))?,
        };
        Ok(Instance {
            graph,
            sensors,
            targets,
            objective,
            lambda: self.lambda.unwrap_or(1),
            k: self.k,
            sigma: self.sigma,
        })
    }
}

fn check_token(name: &str) -> Result<(), Failure> {
    let bad = name.is_empty() || name.chars().any(|c| c.is_whitespace() || matches!(c, ':' | ',' | '|' | '#'));
    if bad {
        return Err(Failure::Input(format!("invalid node name \"{name}\"")));
    }
    Ok(())
}

impl Instance {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        InstanceFile::read(path)?.resolve()
    }

    pub fn lambda(&self, o: &Overrides) -> usize {
        o.lambda.unwrap_or(self.lambda)
    }

    pub fn objective(&self, o: &Overrides) -> Objective {
        o.objective.unwrap_or(self.objective)
    }

    pub fn slots(&self, o: &Overrides) -> Result<(usize, usize), Failure> {
        let k = o.k.or(self.k).ok_or_else(|| Failure::Input("k is required (file or --k)".into()))?;
        let sigma =
            o.sigma.or(self.sigma).ok_or_else(|| Failure::Input("sigma is required (file or --sigma)".into()))?;
        Ok((k, sigma))
    }

    /// Coverage graph over `devices` (default: the instance sensors).
    pub fn coverage(&self, o: &Overrides, devices: Option<&[NodeId]>) -> Result<CoverageGraph, Failure> {
        let devices = devices.unwrap_or(&self.sensors);
        Ok(build(&self.graph, self.objective(o), devices, &self.targets, self.lambda(o))?)
    }

    pub fn problem(&self, o: &Overrides, devices: Option<&[NodeId]>) -> Result<ProblemInstance, Failure> {
        let (k, sigma) = self.slots(o)?;
        Ok(ProblemInstance::new(self.coverage(o, devices)?, k, sigma)?)
    }
}

/// Reads a whitespace-separated edge list (`a b` per line, `#` comments).
pub fn parse_edge_list(text: &str) -> Result<NetworkGraph, Failure> {
    let mut builder = GraphBuilder::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields[..] {
            [a] => {
                check_token(a)?;
                builder.node(a);
            }
            [a, b, ..] => {
                check_token(a)?;
                check_token(b)?;
                let (x, y) = (builder.node(a), builder.node(b));
                if x == y {
                    log::warn!("line {}: dropping self-loop on {a}", i + 1);
                } else if builder.has_edge(x, y) {
                    log::warn!("line {}: dropping repeated edge {a} {b}", i + 1);
                } else {
                    builder.edge_between(x, y)?;
                }
            }
            [] => unreachable!("blank lines are skipped"),
        }
    }
    Ok(builder.build())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PATH: &str = r#"
objective = "detection"
lambda = 1
k = 2
sigma = 1
sensors = ["2", "3"]
edges = [["1", "2"], ["2", "3"], ["3", "4"]]
targets = "all-edges"
"#;

    #[test]
    fn path_instance_resolves() {
        let inst = InstanceFile::parse(PATH, "path").unwrap().resolve().unwrap();
        assert_eq!(inst.graph.node_count(), 4);
        assert_eq!(inst.targets.len(), 3);
        let cov = inst.coverage(&Overrides::default(), None).unwrap();
        assert_eq!(cov.to_adjacency_text(), "2: 1-2,2-3\n3: 2-3,3-4\n");
    }

    #[test]
    fn unknown_names_are_listed() {
        let text = PATH.replace("sensors = [\"2\", \"3\"]", "sensors = [\"2\", \"9\", \"x\"]");
        let Err(Failure::Input(msg)) = InstanceFile::parse(&text, "p").unwrap().resolve() else {
            panic!("expected an input error");
        };
        assert!(msg.contains('9') && msg.contains('x'), "{msg}");
    }

    #[test]
    fn declared_nodes_constrain_edges() {
        let text = "nodes = [\"a\", \"b\"]\nedges = [[\"a\", \"c\"]]\n";
        let Err(Failure::Input(msg)) = InstanceFile::parse(text, "p").unwrap().resolve() else {
            panic!("expected an input error");
        };
        assert!(msg.contains("c"), "{msg}");
    }

    #[test]
    fn bad_tokens_and_syntax() {
        let text = "edges = [[\"a\", \"b c\"]]\n";
        let Err(Failure::Input(msg)) = InstanceFile::parse(text, "p").unwrap().resolve() else {
            panic!("expected an input error");
        };
        assert!(msg.contains("b c"));
        let Err(Failure::Input(msg)) = InstanceFile::parse("k = 2\nedges = [[\"a\"\n", "p") else {
            panic!("expected a parse error");
        };
        assert!(msg.contains("line"), "{msg}");
    }

    #[test]
    fn explicit_targets_and_round_trip() {
        let text = "edges = [[\"a\", \"b\"], [\"b\", \"c\"]]\n[targets]\nnodes = [\"a\"]\nedges = [[\"c\", \"b\"]]\n";
        let file = InstanceFile::parse(text, "p").unwrap();
        let inst = file.resolve().unwrap();
        assert_eq!(inst.targets.len(), 2);
        let again = InstanceFile::parse(&file.to_toml(), "again").unwrap().resolve().unwrap();
        assert_eq!(again.targets, inst.targets);
    }

    #[test]
    fn edge_lists() {
        let g = parse_edge_list("# pipes\na b\nb c 3.5\nc a\na b\nd\n").unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);
    }
}
