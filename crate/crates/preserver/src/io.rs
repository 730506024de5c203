//! Text formats: instances (`g`/`grid` headers, `e`/`S`/`P`/`k` records),
//! preserver witnesses (`size` + `e` lines), and tree decomposition files
//! (`td` header with `b` bag and `t` tree-edge lines).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Instance, Preserver, TerminalSpec};
use crate::grid::{build_grid, GridSpec};
use crate::twdp::TreeDecomposition;

/// A parsed instance; grid instances keep their spec for the grid solver.
#[derive(Debug, Clone)]
pub struct ParsedInstance {
    pub instance: Instance,
    pub grid: Option<GridSpec>,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: line + 1,
        msg: msg.into(),
    }
}

fn parse_vertex(tok: &str, grid: Option<&GridSpec>, lineno: usize) -> Result<u32> {
    if let Some(inner) = tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let spec = grid.ok_or_else(|| {
            perr(lineno, "coordinate token outside a grid instance")
        })?;
        let (xs, ys) = inner
            .split_once(',')
            .ok_or_else(|| perr(lineno, format!("bad coordinate token `{tok}`")))?;
        let x: usize = xs
            .trim()
            .parse()
            .map_err(|_| perr(lineno, format!("bad coordinate `{tok}`")))?;
        let y: usize = ys
            .trim()
            .parse()
            .map_err(|_| perr(lineno, format!("bad coordinate `{tok}`")))?;
        if !spec.contains(x, y) {
            return Err(perr(lineno, format!("coordinate ({x},{y}) outside grid")));
        }
        Ok(spec.id(x, y))
    } else {
        tok.parse()
            .map_err(|_| perr(lineno, format!("bad vertex id `{tok}`")))
    }
}

pub fn parse_instance(text: &str) -> Result<ParsedInstance> {
    let mut n: Option<usize> = None;
    let mut grid: Option<GridSpec> = None;
    let mut edges: Vec<Edge> = Vec::new();
    let mut subset: Option<Vec<u32>> = None;
    let mut pairs: Option<Vec<(u32, u32)>> = None;
    let mut budget: Option<u64> = None;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().unwrap();
        match head {
            "g" => {
                let v: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `g <n>`"))?;
                n = Some(v);
            }
            "grid" => {
                let w: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `grid <width> <height>`"))?;
                let h: usize = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `grid <width> <height>`"))?;
                grid = Some(GridSpec::new(w, h).map_err(|e| perr(lineno, e.to_string()))?);
            }
            "e" => {
                if grid.is_some() {
                    return Err(perr(lineno, "grid instances define edges implicitly"));
                }
                let u = parse_vertex(
                    toks.next().ok_or_else(|| perr(lineno, "expected `e <u> <v>`"))?,
                    grid.as_ref(),
                    lineno,
                )?;
                let v = parse_vertex(
                    toks.next().ok_or_else(|| perr(lineno, "expected `e <u> <v>`"))?,
                    grid.as_ref(),
                    lineno,
                )?;
                edges.push((u, v));
            }
            "S" => {
                let mut vs = Vec::new();
                for t in toks {
                    vs.push(parse_vertex(t, grid.as_ref(), lineno)?);
                }
                if pairs.is_some() {
                    return Err(perr(lineno, "instance has both `S` and `P` records"));
                }
                subset.get_or_insert_with(Vec::new).extend(vs);
            }
            "P" => {
                if subset.is_some() {
                    return Err(perr(lineno, "instance has both `S` and `P` records"));
                }
                let u = parse_vertex(
                    toks.next().ok_or_else(|| perr(lineno, "expected `P <u> <v>`"))?,
                    grid.as_ref(),
                    lineno,
                )?;
                let v = parse_vertex(
                    toks.next().ok_or_else(|| perr(lineno, "expected `P <u> <v>`"))?,
                    grid.as_ref(),
                    lineno,
                )?;
                pairs.get_or_insert_with(Vec::new).push((u, v));
            }
            "k" => {
                let v: u64 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `k <budget>`"))?;
                budget = Some(v);
            }
            other => return Err(perr(lineno, format!("unknown record `{other}`"))),
        }
    }

    let graph = match (grid, n) {
        (Some(spec), None) => build_grid(&spec),
        (None, Some(n)) => {
            let mut g = Graph::new(n);
            for (u, v) in edges {
                g.add_edge(u, v)
                    .map_err(|e| Error::InvalidInstance(e.to_string()))?;
            }
            g
        }
        (Some(_), Some(_)) => {
            return Err(Error::InvalidInstance(
                "instance has both `g` and `grid` headers".into(),
            ))
        }
        (None, None) => {
            return Err(Error::InvalidInstance(
                "instance is missing a `g` or `grid` header".into(),
            ))
        }
    };

    let terminals = match (subset, pairs) {
        (Some(s), None) => TerminalSpec::subset(s),
        (None, Some(p)) => {
            for &(u, v) in &p {
                if u == v {
                    return Err(Error::InvalidInstance(format!(
                        "terminal pair with equal endpoints ({u}, {u})"
                    )));
                }
            }
            TerminalSpec::pairs(p)
        }
        (None, None) => {
            return Err(Error::InvalidInstance(
                "instance is missing terminals (`S` or `P` records)".into(),
            ))
        }
        (Some(_), Some(_)) => unreachable!("rejected during parsing"),
    };

    let mut instance = Instance::new(graph, terminals)?;
    instance.budget = budget;
    Ok(ParsedInstance { instance, grid })
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<ParsedInstance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

/// Canonical text of an instance; `comments` go first as `#` lines.
pub fn write_instance(inst: &Instance, grid: Option<&GridSpec>, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    match grid {
        Some(spec) => {
            let _ = writeln!(out, "grid {} {}", spec.width, spec.height);
        }
        None => {
            let _ = writeln!(out, "g {}", inst.graph.n());
            for (u, v) in inst.graph.edges() {
                let _ = writeln!(out, "e {u} {v}");
            }
        }
    }
    match &inst.terminals {
        TerminalSpec::Subset(s) => {
            let ids: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "S {}", ids.join(" "));
        }
        TerminalSpec::Pairs(ps) => {
            for (u, v) in ps {
                let _ = writeln!(out, "P {u} {v}");
            }
        }
    }
    if let Some(k) = inst.budget {
        let _ = writeln!(out, "k {k}");
    }
    out
}

/// Short stable digest of the canonical instance text.
pub fn instance_digest(inst: &Instance, grid: Option<&GridSpec>) -> String {
    let text = write_instance(inst, grid, &[]);
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

pub fn write_witness(p: &Preserver) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "size {}", p.len());
    for (u, v) in p.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    out
}

/// Parses a witness and validates it against the host instance.
pub fn parse_witness(text: &str, inst: &Instance) -> Result<Preserver> {
    let mut declared: Option<usize> = None;
    let mut edges: Vec<Edge> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap() {
            "size" => {
                declared = Some(
                    toks.next()
                        .and_then(|t| t.parse().ok())
                        .ok_or_else(|| perr(lineno, "expected `size <m>`"))?,
                );
            }
            "e" => {
                let u: u32 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `e <u> <v>`"))?;
                let v: u32 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `e <u> <v>`"))?;
                edges.push((u, v));
            }
            other => return Err(perr(lineno, format!("unknown witness record `{other}`"))),
        }
    }
    let p = Preserver::from_edges(edges);
    if let Some(d) = declared {
        if d != p.len() {
            return Err(Error::InvalidInstance(format!(
                "witness declares size {d} but has {} distinct edges",
                p.len()
            )));
        }
    }
    if !p.is_subgraph_of(&inst.graph) {
        return Err(Error::InvalidInstance(
            "witness contains edges outside the host graph".into(),
        ));
    }
    Ok(p)
}

/// Parses a `td` file: `b <node> <v...>` bag lines and `t <a> <b>` tree
/// edges, node ids remapped densely in order of first appearance.
pub fn parse_tree_decomposition(text: &str) -> Result<TreeDecomposition> {
    let mut saw_header = false;
    let mut ids: BTreeMap<u64, usize> = BTreeMap::new();
    let mut bags: Vec<Vec<u32>> = Vec::new();
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next().unwrap() {
            "td" => saw_header = true,
            "b" => {
                let id: u64 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `b <node> <v...>`"))?;
                let mut bag = Vec::new();
                for t in toks {
                    bag.push(
                        t.parse::<u32>()
                            .map_err(|_| perr(lineno, format!("bad vertex id `{t}`")))?,
                    );
                }
                bag.sort_unstable();
                bag.dedup();
                if ids.contains_key(&id) {
                    return Err(perr(lineno, format!("duplicate bag id {id}")));
                }
                ids.insert(id, bags.len());
                bags.push(bag);
            }
            "t" => {
                let a: u64 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `t <a> <b>`"))?;
                let b: u64 = toks
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| perr(lineno, "expected `t <a> <b>`"))?;
                raw_edges.push((a, b));
            }
            other => return Err(perr(lineno, format!("unknown td record `{other}`"))),
        }
    }
    if !saw_header {
        return Err(Error::InvalidInstance("missing `td` header".into()));
    }
    let mut edges = Vec::new();
    for (a, b) in raw_edges {
        let ia = *ids
            .get(&a)
            .ok_or_else(|| Error::InvalidInstance(format!("tree edge references unknown bag {a}")))?;
        let ib = *ids
            .get(&b)
            .ok_or_else(|| Error::InvalidInstance(format!("tree edge references unknown bag {b}")))?;
        edges.push((ia, ib));
    }
    Ok(TreeDecomposition::new(bags, edges))
}

pub fn write_tree_decomposition(td: &TreeDecomposition) -> String {
    let mut out = String::from("td\n");
    for (i, bag) in td.bags.iter().enumerate() {
        let vs: Vec<String> = bag.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "b {i} {}", vs.join(" "));
    }
    for &(a, b) in &td.edges {
        let _ = writeln!(out, "t {a} {b}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_plain_instance() {
        let text = "# sample\ng 4\ne 0 1\ne 1 2\ne 2 3\nP 0 3\nk 3\n";
        let parsed = parse_instance(text).unwrap();
        assert_eq!(parsed.instance.graph.n(), 4);
        assert_eq!(parsed.instance.budget, Some(3));
        let emitted = write_instance(&parsed.instance, None, &[]);
        let reparsed = parse_instance(&emitted).unwrap();
        assert_eq!(reparsed.instance.graph.edges(), parsed.instance.graph.edges());
    }

    #[test]
    fn grid_instance_with_coordinates() {
        let text = "grid 5 5\nP (0,0) (4,4)\n";
        let parsed = parse_instance(text).unwrap();
        assert!(parsed.grid.is_some());
        assert_eq!(parsed.instance.graph.n(), 25);
        assert_eq!(parsed.instance.pairs(), vec![(0, 24)]);
    }

    #[test]
    fn subset_terminals_accept_coordinates() {
        let text = "grid 3 3\nS (0,0) (2,2) 4\n";
        let parsed = parse_instance(text).unwrap();
        assert_eq!(
            parsed.instance.terminals,
            TerminalSpec::subset([0u32, 4, 8])
        );
    }

    #[test]
    fn rejects_mixed_terminal_records() {
        assert!(parse_instance("g 3\ne 0 1\nS 0 1\nP 0 2\n").is_err());
        assert!(parse_instance("g 3\ne 0 1\n").is_err());
        assert!(parse_instance("grid 2 2\ne 0 1\nP 0 3\n").is_err());
    }

    #[test]
    fn witness_roundtrip_and_validation() {
        let parsed = parse_instance("g 3\ne 0 1\ne 1 2\nP 0 2\n").unwrap();
        let w = Preserver::from_edges([(0u32, 1), (1, 2)]);
        let text = write_witness(&w);
        assert_eq!(parse_witness(&text, &parsed.instance).unwrap(), w);
        assert!(parse_witness("size 1\ne 0 2\n", &parsed.instance).is_err());
        assert!(parse_witness("size 2\ne 0 1\n", &parsed.instance).is_err());
    }

    #[test]
    fn td_parse_and_remap() {
        let text = "td\nb 10 0 1\nb 20 1 2\nt 10 20\n";
        let td = parse_tree_decomposition(text).unwrap();
        assert_eq!(td.bags.len(), 2);
        assert_eq!(td.edges, vec![(0, 1)]);
        assert_eq!(td.width(), 1);
    }

    #[test]
    fn digest_is_stable_under_comments() {
        let a = parse_instance("g 3\ne 0 1\ne 1 2\nP 0 2\n").unwrap();
        let b = parse_instance("# hello\ng 3\ne 1 2\ne 0 1\nP 0 2\n").unwrap();
        assert_eq!(
            instance_digest(&a.instance, None),
            instance_digest(&b.instance, None)
        );
    }
}
