//! Text formats for graphs and assignments, and DOT export.
//!
//! Graph files have one record per line; `#` starts a comment:
//!
//! ```text
//! node <id>
//! edge <u> <pu> <v> <pv> <uv|vu>
//! loop <v> <p_out> <p_in>
//! ```
//!
//! Node ids are arbitrary non-negative integers and are renumbered densely in
//! declaration order. Assignment files hold `x <edge-id> <p/q>` lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{GraphError, Orientation, PortGraph, RawGraph};
use crate::rational::Rat;
use crate::verify::EdgeAssignment;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("assignment covers {got} of {expected} edges; edge {missing} is missing")]
    Incomplete { expected: usize, got: usize, missing: usize },
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn records(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("");
        let fields: Vec<&str> = line.split_whitespace().collect();
        (!fields.is_empty()).then_some((i + 1, fields))
    })
}

fn number(line: usize, field: &str, what: &str) -> Result<usize, FormatError> {
    field.parse().map_err(|_| syntax(line, format!("{what} {field:?} is not a non-negative integer")))
}

/// Parses a graph file without validating it.
pub fn parse_raw_graph(text: &str) -> Result<RawGraph, FormatError> {
    let mut ids: HashMap<usize, usize> = HashMap::new();
    let mut raw = RawGraph::new(0);
    for (line, f) in records(text) {
        let node = |ids: &HashMap<usize, usize>, field: &str| -> Result<usize, FormatError> {
            let id = number(line, field, "node id")?;
            ids.get(&id).copied().ok_or_else(|| syntax(line, format!("node {id} used before its declaration")))
        };
        match f.as_slice() {
            ["node", id] => {
                let id = number(line, id, "node id")?;
                if ids.insert(id, raw.nodes).is_some() {
                    return Err(syntax(line, format!("node {id} declared twice")));
                }
                raw.nodes += 1;
            }
            ["edge", u, pu, v, pv, dir] => {
                let dir = match *dir {
                    "uv" => Orientation::UV,
                    "vu" => Orientation::VU,
                    other => return Err(syntax(line, format!("orientation must be uv or vu, got {other:?}"))),
                };
                let (u, v) = (node(&ids, u)?, node(&ids, v)?);
                raw.edge(u, number(line, pu, "port")?, v, number(line, pv, "port")?, dir);
            }
            ["loop", v, p_out, p_in] => {
                let v = node(&ids, v)?;
                raw.self_loop(v, number(line, p_out, "port")?, number(line, p_in, "port")?);
            }
            [kind, ..] if ["node", "edge", "loop"].contains(kind) => {
                return Err(syntax(line, format!("wrong number of fields for {kind}")));
            }
            [kind, ..] => return Err(syntax(line, format!("unknown record {kind:?}"))),
            [] => unreachable!(),
        }
    }
    Ok(raw)
}

pub fn parse_graph(text: &str) -> Result<PortGraph, FormatError> {
    Ok(parse_raw_graph(text)?.build()?)
}

/// Canonical text: all nodes, then edges in id order.
pub fn write_graph(g: &PortGraph) -> String {
    let mut out = String::new();
    for v in g.nodes() {
        writeln!(out, "node {v}").unwrap();
    }
    for e in g.edges() {
        if e.is_loop() {
            let ((_, p_out), (_, p_in)) = (e.tail(), e.head());
            writeln!(out, "loop {} {} {}", e.u, p_out, p_in).unwrap();
        } else {
            let dir = match e.orientation {
                Orientation::UV => "uv",
                Orientation::VU => "vu",
            };
            writeln!(out, "edge {} {} {} {} {}", e.u, e.pu, e.v, e.pv, dir).unwrap();
        }
    }
    out
}

/// Parses an assignment for a graph with `edges` edges. Every edge must be
/// given exactly once.
pub fn parse_assignment(text: &str, edges: usize) -> Result<EdgeAssignment, FormatError> {
    let mut values: Vec<Option<Rat>> = vec![None; edges];
    for (line, f) in records(text) {
        match f.as_slice() {
            ["x", e, value] => {
                let e = number(line, e, "edge id")?;
                let slot = values.get_mut(e).ok_or_else(|| syntax(line, format!("edge {e} out of range")))?;
                if slot.is_some() {
                    return Err(syntax(line, format!("edge {e} assigned twice")));
                }
                *slot = Some(value.parse().map_err(|err| syntax(line, format!("{err}")))?);
            }
            _ => return Err(syntax(line, "expected `x <edge-id> <p/q>`")),
        }
    }
    let got = values.iter().filter(|v| v.is_some()).count();
    if let Some(missing) = values.iter().position(Option::is_none) {
        return Err(FormatError::Incomplete { expected: edges, got, missing });
    }
    Ok(EdgeAssignment::new(values.into_iter().map(Option::unwrap).collect()))
}

pub fn write_assignment(x: &EdgeAssignment) -> String {
    let mut out = String::new();
    for (e, v) in x.values().iter().enumerate() {
        writeln!(out, "x {e} {v}").unwrap();
    }
    out
}

/// Graphviz rendering: arrows follow the orientation, `taillabel` and
/// `headlabel` carry the port numbers, edge labels carry `x` when given.
pub fn to_dot(g: &PortGraph, x: Option<&EdgeAssignment>) -> String {
    let mut out = String::from("digraph G {\n  node [shape=circle];\n");
    for v in g.nodes() {
        writeln!(out, "  {v};").unwrap();
    }
    for (id, e) in g.edges().iter().enumerate() {
        let ((t, tp), (h, hp)) = (e.tail(), e.head());
        let label = x.map(|x| format!(", label=\"{}\"", x.get(id))).unwrap_or_default();
        writeln!(out, "  {t} -> {h} [taillabel=\"{tp}\", headlabel=\"{hp}\"{label}];").unwrap();
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const G0: &str = "# one node, two loops\nnode 7\nloop 7 1 2\nloop 7 3 4\n";

    #[test]
    fn parse_loopy() {
        let g = parse_graph(G0).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.degree(0), 4);
        assert!(g.is_loopy());
        assert_eq!(write_graph(&g), "node 0\nloop 0 1 2\nloop 0 3 4\n");
    }

    #[test]
    fn roundtrip_is_byte_identical() {
        let text = "node 0\nnode 1\nnode 2\nedge 0 1 1 2 uv\nedge 1 1 2 1 vu\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(write_graph(&g), text);
        assert_eq!(write_graph(&parse_graph(&write_graph(&g)).unwrap()), text);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_raw_graph("node 0\nedge 0 1 5 1 uv\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 2, .. }), "{err}");
        let err = parse_raw_graph("node 0\n\nedge 0 1 0 2 up\n").unwrap_err();
        assert!(matches!(err, FormatError::Syntax { line: 3, .. }), "{err}");
        assert!(parse_raw_graph("vertex 1\n").is_err());
        assert!(parse_raw_graph("node 1\nnode 1\n").is_err());
    }

    #[test]
    fn invalid_graph_is_reported() {
        let err = parse_graph("node 0\nnode 1\nedge 0 2 1 1 uv\n").unwrap_err();
        assert!(matches!(err, FormatError::Graph(GraphError::Invalid(_))));
    }

    #[test]
    fn assignments() {
        let x = parse_assignment("x 1 1\nx 0 1/2 # half\n", 2).unwrap();
        assert_eq!(x.values(), &[Rat::half(), Rat::one()]);
        assert_eq!(write_assignment(&x), "x 0 1/2\nx 1 1/1\n");
        assert!(matches!(parse_assignment("x 0 1\n", 2), Err(FormatError::Incomplete { missing: 1, .. })));
        assert!(parse_assignment("x 0 1\nx 0 1\n", 1).is_err());
        assert!(parse_assignment("x 0 -1/2\n", 1).is_err());
        assert!(parse_assignment("x 3 1\n", 1).is_err());
    }

    #[test]
    fn dot_has_ports_and_arrows() {
        let g = parse_graph("node 0\nnode 1\nedge 0 1 1 1 vu\n").unwrap();
        let dot = to_dot(&g, Some(&EdgeAssignment::new(vec![Rat::one()])));
        assert!(dot.contains("1 -> 0 [taillabel=\"1\", headlabel=\"1\", label=\"1/1\"]"));
    }
}
