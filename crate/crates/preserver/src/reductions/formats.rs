//! Text formats for the reduction source problems. Each file starts with
//! a problem header (`mcc`, `bmcc`, `mwc3`, `alc`, `rsa`) followed by
//! typed records; `#` starts a comment.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::reductions::{AlcInstance, BmccInstance, MccInstance, Mwc3Instance, RsaInstance};

#[derive(Debug, Clone)]
pub enum SourceInstance {
    Mcc(MccInstance),
    Bmcc(BmccInstance),
    Mwc3(Mwc3Instance),
    Alc(AlcInstance),
    Rsa(RsaInstance),
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line: line + 1,
        msg: msg.into(),
    }
}

struct Records<'a> {
    /// (line number, record tokens)
    rows: Vec<(usize, Vec<&'a str>)>,
}

fn tokenize(text: &str) -> Records<'_> {
    let rows = text
        .lines()
        .enumerate()
        .filter_map(|(no, raw)| {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                None
            } else {
                Some((no, line.split_whitespace().collect()))
            }
        })
        .collect();
    Records { rows }
}

fn num<T: std::str::FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| perr(line, format!("bad number `{tok}`")))
}

/// Parses any of the five source formats, dispatching on the header.
pub fn parse_source(text: &str) -> Result<SourceInstance> {
    let records = tokenize(text);
    let Some(&(hline, ref head)) = records.rows.first() else {
        return Err(Error::InvalidInstance("empty source file".into()));
    };
    let body = &records.rows[1..];
    match head[0] {
        "mcc" => parse_mcc(body).map(SourceInstance::Mcc),
        "bmcc" => parse_bmcc(body).map(SourceInstance::Bmcc),
        "mwc3" => parse_mwc3(body).map(SourceInstance::Mwc3),
        "alc" => parse_alc(body).map(SourceInstance::Alc),
        "rsa" => parse_rsa(body).map(SourceInstance::Rsa),
        other => Err(perr(hline, format!("unknown source header `{other}`"))),
    }
}

fn parse_common_graph(rows: &[(usize, Vec<&str>)]) -> Result<(Option<usize>, Vec<(u32, u32)>, Option<u64>)> {
    let mut n = None;
    let mut edges = Vec::new();
    let mut budget = None;
    for &(line, ref toks) in rows {
        match toks[0] {
            "g" | "n" => n = Some(num(toks.get(1).ok_or_else(|| perr(line, "missing count"))?, line)?),
            "e" => {
                let u = num(toks.get(1).ok_or_else(|| perr(line, "expected `e <u> <v>`"))?, line)?;
                let v = num(toks.get(2).ok_or_else(|| perr(line, "expected `e <u> <v>`"))?, line)?;
                edges.push((u, v));
            }
            "k" => budget = Some(num(toks.get(1).ok_or_else(|| perr(line, "missing budget"))?, line)?),
            _ => {}
        }
    }
    Ok((n, edges, budget))
}

fn parse_mcc(rows: &[(usize, Vec<&str>)]) -> Result<MccInstance> {
    let (n, edges, _) = parse_common_graph(rows)?;
    let n = n.ok_or_else(|| Error::InvalidInstance("mcc file missing `n`".into()))?;
    let mut classes = Vec::new();
    for &(line, ref toks) in rows {
        if toks[0] == "c" {
            let mut class = Vec::new();
            for t in &toks[1..] {
                class.push(num(t, line)?);
            }
            classes.push(class);
        }
    }
    let mut g = Graph::new(n);
    for (u, v) in edges {
        g.add_edge(u, v)?;
    }
    MccInstance::new(g, classes)
}

fn parse_bmcc(rows: &[(usize, Vec<&str>)]) -> Result<BmccInstance> {
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut edges = Vec::new();
    for &(line, ref toks) in rows {
        match toks[0] {
            "L" | "R" => {
                let mut class = Vec::new();
                for t in &toks[1..] {
                    class.push(num(t, line)?);
                }
                if toks[0] == "L" {
                    left.push(class);
                } else {
                    right.push(class);
                }
            }
            "e" => {
                let u = num(toks.get(1).ok_or_else(|| perr(line, "expected `e <u> <v>`"))?, line)?;
                let v = num(toks.get(2).ok_or_else(|| perr(line, "expected `e <u> <v>`"))?, line)?;
                edges.push((u, v));
            }
            _ => {}
        }
    }
    BmccInstance::new(left, right, edges)
}

fn parse_mwc3(rows: &[(usize, Vec<&str>)]) -> Result<Mwc3Instance> {
    let (n, edges, budget) = parse_common_graph(rows)?;
    let n = n.ok_or_else(|| Error::InvalidInstance("mwc3 file missing `g`".into()))?;
    let mut terminals = None;
    for &(line, ref toks) in rows {
        if toks[0] == "t" {
            if toks.len() != 4 {
                return Err(perr(line, "expected `t <s1> <s2> <s3>`"));
            }
            terminals = Some([num(toks[1], line)?, num(toks[2], line)?, num(toks[3], line)?]);
        }
    }
    let terminals =
        terminals.ok_or_else(|| Error::InvalidInstance("mwc3 file missing `t`".into()))?;
    let mut g = Graph::new(n);
    for (u, v) in edges {
        g.add_edge(u, v)?;
    }
    let mut inst = Mwc3Instance::new(g, terminals)?;
    inst.budget = budget;
    Ok(inst)
}

fn parse_alc(rows: &[(usize, Vec<&str>)]) -> Result<AlcInstance> {
    let (n, edges, budget) = parse_common_graph(rows)?;
    let n = n.ok_or_else(|| Error::InvalidInstance("alc file missing `n`".into()))?;
    let mut lists = vec![Vec::new(); n];
    for &(line, ref toks) in rows {
        if toks[0] == "l" {
            let v: usize = num(toks.get(1).ok_or_else(|| perr(line, "expected `l <v> <colors...>`"))?, line)?;
            if v >= n {
                return Err(perr(line, format!("list vertex {v} out of range")));
            }
            for t in &toks[2..] {
                lists[v].push(num(t, line)?);
            }
        }
    }
    let mut g = Graph::new(n);
    for (u, v) in edges {
        g.add_edge(u, v)?;
    }
    let mut inst = AlcInstance::new(g, lists)?;
    inst.budget = budget;
    Ok(inst)
}

fn parse_rsa(rows: &[(usize, Vec<&str>)]) -> Result<RsaInstance> {
    let mut points = Vec::new();
    let mut budget = None;
    for &(line, ref toks) in rows {
        match toks[0] {
            "p" => {
                let x = num(toks.get(1).ok_or_else(|| perr(line, "expected `p <x> <y>`"))?, line)?;
                let y = num(toks.get(2).ok_or_else(|| perr(line, "expected `p <x> <y>`"))?, line)?;
                points.push((x, y));
            }
            "k" => budget = Some(num(toks.get(1).ok_or_else(|| perr(line, "missing budget"))?, line)?),
            _ => {}
        }
    }
    let mut inst = RsaInstance::new(points)?;
    inst.budget = budget;
    Ok(inst)
}

pub fn write_mcc(src: &MccInstance, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "mcc");
    let _ = writeln!(out, "n {}", src.graph.n());
    for class in &src.classes {
        let ids: Vec<String> = class.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "c {}", ids.join(" "));
    }
    for (u, v) in src.graph.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    out
}

pub fn write_bmcc(
    left: &[Vec<u32>],
    right: &[Vec<u32>],
    edges: &[(u32, u32)],
    comments: &[String],
) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "bmcc");
    for class in left {
        let ids: Vec<String> = class.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "L {}", ids.join(" "));
    }
    for class in right {
        let ids: Vec<String> = class.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "R {}", ids.join(" "));
    }
    for (u, v) in edges {
        let _ = writeln!(out, "e {u} {v}");
    }
    out
}

pub fn write_mwc3(src: &Mwc3Instance, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "mwc3");
    let _ = writeln!(out, "g {}", src.graph.n());
    for (u, v) in src.graph.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    let [a, b, c] = src.terminals;
    let _ = writeln!(out, "t {a} {b} {c}");
    if let Some(k) = src.budget {
        let _ = writeln!(out, "k {k}");
    }
    out
}

pub fn write_alc(src: &AlcInstance, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "alc");
    let _ = writeln!(out, "n {}", src.graph.n());
    for (v, list) in src.lists.iter().enumerate() {
        let cs: Vec<String> = list.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "l {v} {}", cs.join(" "));
    }
    for (u, v) in src.graph.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    if let Some(k) = src.budget {
        let _ = writeln!(out, "k {k}");
    }
    out
}

pub fn write_rsa(src: &RsaInstance, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "rsa");
    for &(x, y) in &src.points {
        let _ = writeln!(out, "p {x} {y}");
    }
    if let Some(k) = src.budget {
        let _ = writeln!(out, "k {k}");
    }
    out
}
