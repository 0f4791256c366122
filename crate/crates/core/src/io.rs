//! Text formats. Vertex and bag ids in files are 1-based.
//!
//! * `.gr`: `n m`, then `u v w` per edge; `w` is a decimal, a fraction
//!   `p/q` or `inf`.
//! * `.td`: PACE `s td <bags> <max bag> <n>`, `b <id> <v...>`, `<id> <id>`.
//! * `.bcd`: `s <id> <parent|0> r <root|0> V <v...> T <a b ...>` per supernode.
//! * `.inst`: a `.gr` body plus `c <clients...>`, `f <facilities...>`, `k <int>`.
//! * ladders and matchings: one `a b` pair per line; id lists: whitespace separated.
//!
//! Lines starting with `#` are comments everywhere; `c` lines are comments
//! in `.td` files.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::bounds::parse_rational;
use crate::coreset::ClusteringInstance;
use crate::decomposition::{BufferedCopDecomposition, Supernode, TreeDecomposition};
use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

/// Non-empty, non-comment lines with their 1-based numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn id(tok: &str, n: usize, line: usize) -> Result<usize> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 && v <= n => Ok(v - 1),
        Ok(v) => perr(line, format!("id {v} outside 1..={n}")),
        Err(_) => perr(line, format!("expected an id, got {tok:?}")),
    }
}

fn count(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    match tok.map(str::parse::<usize>) {
        Some(Ok(v)) => Ok(v),
        _ => perr(line, format!("expected {what}")),
    }
}

pub fn parse_weight(tok: &str) -> Option<f64> {
    if tok.eq_ignore_ascii_case("inf") {
        return Some(f64::INFINITY);
    }
    if tok.contains('/') {
        return parse_rational(tok).ok().and_then(|q| q.to_f64());
    }
    tok.parse::<f64>().ok().filter(|w| w.is_finite())
}

struct GrParser {
    n: usize,
    m: usize,
    edges: Vec<(usize, usize, f64)>,
    header_seen: bool,
}

impl GrParser {
    fn new() -> Self {
        GrParser { n: 0, m: 0, edges: Vec::new(), header_seen: false }
    }

    fn feed(&mut self, no: usize, line: &str) -> Result<()> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !self.header_seen {
            if toks.len() != 2 {
                return perr(no, "expected header `n m`");
            }
            self.n = count(Some(toks[0]), no, "vertex count")?;
            self.m = count(Some(toks[1]), no, "edge count")?;
            self.header_seen = true;
            return Ok(());
        }
        if toks.len() != 3 {
            return perr(no, "expected `u v w`");
        }
        let u = id(toks[0], self.n, no)?;
        let v = id(toks[1], self.n, no)?;
        let Some(w) = parse_weight(toks[2]).filter(|w| *w >= 0.0) else {
            return perr(no, format!("bad weight {:?}", toks[2]));
        };
        self.edges.push((u, v, w));
        Ok(())
    }

    fn finish(self, last: usize) -> Result<WeightedGraph> {
        if !self.header_seen {
            return perr(last, "missing header");
        }
        if self.edges.len() != self.m {
            return perr(last, format!("header says {} edges, found {}", self.m, self.edges.len()));
        }
        let mut g = WeightedGraph::new(self.n);
        for (u, v, w) in self.edges {
            g.add_edge(u, v, w).or_else(|e| perr(last, e.to_string()))?;
        }
        Ok(g)
    }
}

pub fn parse_gr(text: &str) -> Result<WeightedGraph> {
    let mut p = GrParser::new();
    let mut last = 0;
    for (no, line) in lines(text) {
        p.feed(no, line)?;
        last = no;
    }
    p.finish(last)
}

fn fmt_weight(w: f64) -> String {
    if w.is_infinite() {
        "inf".into()
    } else {
        format!("{w}")
    }
}

pub fn write_gr(g: &WeightedGraph) -> String {
    let mut out = format!("{} {}\n", g.vertex_count(), g.edge_count());
    for e in g.edges() {
        let _ = writeln!(out, "{} {} {}", e.u + 1, e.v + 1, fmt_weight(e.weight));
    }
    out
}

/// A terminating decimal when the denominator allows it, `p/q` otherwise.
pub fn format_rational(q: &BigRational) -> String {
    if q.is_integer() {
        return q.to_integer().to_string();
    }
    let mut den = q.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut a, mut b) = (0usize, 0usize);
    while den.is_even() {
        den /= &two;
        a += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        b += 1;
    }
    if !den.is_one() {
        return format!("{}/{}", q.numer(), q.denom());
    }
    let digits = a.max(b);
    let scaled = (q * BigRational::from_integer(num_traits::pow(BigInt::from(10), digits))).to_integer();
    let neg = scaled < BigInt::zero();
    let s = format!("{:0>width$}", scaled.magnitude(), width = digits + 1);
    let (int, frac) = s.split_at(s.len() - digits);
    format!("{}{int}.{frac}", if neg { "-" } else { "" })
}

/// `.gr` text with exact weights (`None` is written as `inf`).
pub fn write_gr_exact(n: usize, edges: &[(usize, usize, Option<BigRational>)]) -> String {
    let mut out = format!("{n} {}\n", edges.len());
    for (u, v, w) in edges {
        let w = w.as_ref().map_or_else(|| "inf".to_string(), format_rational);
        let _ = writeln!(out, "{} {} {w}", u + 1, v + 1);
    }
    out
}

/// Parses a PACE `.td`; `n` is the graph's vertex count. Bag 1 is the root.
pub fn parse_td(text: &str, n: usize) -> Result<TreeDecomposition> {
    let mut header: Option<(usize, usize)> = None;
    let mut bags: Vec<Option<VertexSet>> = Vec::new();
    let mut edges = Vec::new();
    let mut last = 0;
    for (no, line) in lines(text) {
        last = no;
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "c" => {}
            "s" => {
                if header.is_some() || toks.len() != 5 || toks[1] != "td" {
                    return perr(no, "expected one header `s td <bags> <max bag> <n>`");
                }
                let nb = count(Some(toks[2]), no, "bag count")?;
                let tn = count(Some(toks[4]), no, "vertex count")?;
                if tn != n {
                    return perr(no, format!("decomposition is for {tn} vertices, graph has {n}"));
                }
                header = Some((nb, count(Some(toks[3]), no, "max bag size")?));
                bags = vec![None; nb];
            }
            _ if header.is_none() => return perr(no, "missing `s td` header"),
            "b" => {
                let nb = bags.len();
                let b = id(toks.get(1).copied().unwrap_or(""), nb, no)?;
                if bags[b].is_some() {
                    return perr(no, format!("bag {} listed twice", b + 1));
                }
                let vs = toks[2..].iter().map(|t| id(t, n, no)).collect::<Result<Vec<_>>>()?;
                bags[b] = Some(VertexSet::new(vs));
            }
            _ => {
                if toks.len() != 2 {
                    return perr(no, "expected a tree edge `<id> <id>`");
                }
                let nb = bags.len();
                edges.push((id(toks[0], nb, no)?, id(toks[1], nb, no)?));
            }
        }
    }
    let Some((_, maxbag)) = header else {
        return perr(last, "missing `s td` header");
    };
    let bags: Vec<VertexSet> = bags
        .into_iter()
        .enumerate()
        .map(|(i, b)| b.ok_or(i))
        .collect::<std::result::Result<_, _>>()
        .or_else(|i| perr(last, format!("bag {} never listed", i + 1)))?;
    if bags.iter().any(|b| b.len() > maxbag) {
        return perr(last, "a bag exceeds the declared maximum size");
    }
    Ok(TreeDecomposition::new(bags, edges, 0))
}

pub fn write_td(td: &TreeDecomposition, n: usize) -> String {
    let mut out = format!("s td {} {} {n}\n", td.node_count(), td.max_bag_size());
    for (i, b) in td.bags.iter().enumerate() {
        let _ = write!(out, "b {}", i + 1);
        for v in b.iter() {
            let _ = write!(out, " {}", v + 1);
        }
        out.push('\n');
    }
    for (a, b) in &td.edges {
        let _ = writeln!(out, "{} {}", a + 1, b + 1);
    }
    out
}

pub fn parse_bcd(text: &str, n: usize) -> Result<BufferedCopDecomposition> {
    let mut rows: Vec<(Supernode, usize, usize)> = Vec::new();
    for (no, line) in lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() < 6 || toks[0] != "s" || toks[3] != "r" {
            return perr(no, "expected `s <id> <parent|0> r <root|0> V ... T ...`");
        }
        let sid = count(Some(toks[1]), no, "supernode id")?;
        if sid == 0 {
            return perr(no, "supernode ids start at 1");
        }
        let parent = count(Some(toks[2]), no, "parent id")?;
        let root = match count(Some(toks[4]), no, "root vertex")? {
            0 => None,
            r => Some(id(&r.to_string(), n, no)?),
        };
        let rest = &toks[5..];
        let v_at = rest.iter().position(|t| *t == "V");
        let t_at = rest.iter().position(|t| *t == "T");
        let (Some(0), Some(t_at)) = (v_at, t_at) else {
            return perr(no, "expected `V ... T ...` sections");
        };
        let vertices = rest[1..t_at].iter().map(|t| id(t, n, no)).collect::<Result<Vec<_>>>()?;
        let tree_ids = rest[t_at + 1..].iter().map(|t| id(t, n, no)).collect::<Result<Vec<_>>>()?;
        if tree_ids.len() % 2 != 0 {
            return perr(no, "odd number of skeleton endpoints");
        }
        let skeleton = tree_ids.chunks(2).map(|c| (c[0], c[1])).collect();
        rows.push((Supernode { id: sid, vertices: VertexSet::new(vertices), root, skeleton }, parent, no));
    }
    let index: std::collections::HashMap<usize, usize> =
        rows.iter().enumerate().map(|(i, (s, _, _))| (s.id, i)).collect();
    let mut parent = Vec::with_capacity(rows.len());
    for (_, p, no) in &rows {
        parent.push(match *p {
            0 => None,
            p => Some(*index.get(&p).map_or_else(|| perr(*no, format!("unknown parent {p}")), Ok)?),
        });
    }
    BufferedCopDecomposition::new(rows.into_iter().map(|(s, _, _)| s).collect(), parent)
}

pub fn write_bcd(bcd: &BufferedCopDecomposition) -> String {
    let mut out = String::new();
    for (i, s) in bcd.supernodes().iter().enumerate() {
        let parent = bcd.parent(i).map_or(0, |p| bcd.supernodes()[p].id);
        let _ = write!(out, "s {} {parent} r {} V", s.id, s.root.map_or(0, |r| r + 1));
        for v in s.vertices.iter() {
            let _ = write!(out, " {}", v + 1);
        }
        out.push_str(" T");
        for (a, b) in &s.skeleton {
            let _ = write!(out, " {} {}", a + 1, b + 1);
        }
        out.push('\n');
    }
    out
}

pub fn parse_pairs(text: &str, n: usize) -> Result<Vec<(usize, usize)>> {
    lines(text)
        .map(|(no, line)| {
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 2 {
                return perr(no, "expected a pair `a b`");
            }
            Ok((id(toks[0], n, no)?, id(toks[1], n, no)?))
        })
        .collect()
}

pub fn write_pairs(pairs: &[(usize, usize)]) -> String {
    pairs.iter().map(|(a, b)| format!("{} {}\n", a + 1, b + 1)).collect()
}

pub fn parse_ids(text: &str, n: usize) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (no, line) in lines(text) {
        for t in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()) {
            out.push(id(t, n, no)?);
        }
    }
    Ok(out)
}

pub fn write_ids(ids: impl IntoIterator<Item = usize>) -> String {
    let s: Vec<String> = ids.into_iter().map(|v| (v + 1).to_string()).collect();
    s.join(" ") + "\n"
}

pub fn parse_instance(text: &str) -> Result<ClusteringInstance> {
    let mut gr = GrParser::new();
    let mut clients: Vec<(usize, String)> = Vec::new();
    let mut facilities: Vec<(usize, String)> = Vec::new();
    let mut k = None;
    let mut last = 0;
    for (no, line) in lines(text) {
        last = no;
        let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        match head {
            "c" => clients.push((no, rest.to_string())),
            "f" => facilities.push((no, rest.to_string())),
            "k" => {
                if k.is_some() {
                    return perr(no, "`k` given twice");
                }
                k = Some(count(Some(rest.trim()), no, "k")?);
            }
            _ => gr.feed(no, line)?,
        }
    }
    let n = gr.n;
    let g = gr.finish(last)?;
    let collect = |rows: &[(usize, String)]| -> Result<VertexSet> {
        let mut out = Vec::new();
        for (no, r) in rows {
            for t in r.split_whitespace() {
                out.push(id(t, n, *no)?);
            }
        }
        Ok(VertexSet::new(out))
    };
    let Some(k) = k else {
        return perr(last, "missing `k` line");
    };
    ClusteringInstance::new(g, collect(&clients)?, collect(&facilities)?, k)
}

pub fn write_instance(inst: &ClusteringInstance) -> String {
    let mut out = write_gr(&inst.graph);
    let _ = write!(out, "c {}", write_ids(inst.clients.iter()));
    let _ = write!(out, "f {}", write_ids(inst.facilities.iter()));
    let _ = writeln!(out, "k {}", inst.k);
    out
}
