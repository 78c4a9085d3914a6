//! Text formats: facet files, relation CSV, edge lists and a small DOT
//! subset, network JSON, and sample lists.

use crate::complex::SimplicialComplex;
use crate::dowker::{csv_field, Relation};
use crate::error::{Error, Result};
use crate::path::Digraph;
use crate::wireless::WirelessNetwork;

fn strip_hash_comment(line: &str) -> &str {
    line.split('#').next().unwrap().trim()
}

/// One facet per line, labels separated by whitespace.
pub fn parse_facets(text: &str) -> Result<Vec<Vec<String>>> {
    let facets: Vec<Vec<String>> = text
        .lines()
        .map(strip_hash_comment)
        .filter(|l| !l.is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect();
    if facets.is_empty() {
        return Err(Error::parse(1, "no facets found"));
    }
    Ok(facets)
}

pub fn read_complex(text: &str, max_dim: Option<usize>) -> Result<SimplicialComplex> {
    SimplicialComplex::from_facets_capped(&parse_facets(text)?, max_dim)
}

pub fn write_facets(k: &SimplicialComplex) -> String {
    k.facets()
        .iter()
        .map(|f| k.label_simplex(f).join(" ") + "\n")
        .collect()
}

/// Header of column labels, optionally preceded by a corner cell, then one
/// row per line: label followed by 0/1 entries.
pub fn parse_relation_csv(text: &str) -> Result<Relation> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(1, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        let line = rec.position().map_or(1, |p| p.line() as usize);
        records.push((line, rec.iter().map(str::to_string).collect::<Vec<_>>()));
    }
    let Some((_, header)) = records.first() else {
        return Err(Error::parse(1, "relation file is empty"));
    };
    let data = &records[1..];
    let width = data.first().map_or(header.len() + 1, |(_, r)| r.len());
    let col_labels: Vec<String> = if header.len() + 1 == width {
        header.clone()
    } else if header.len() == width {
        header[1..].to_vec()
    } else {
        return Err(Error::parse(
            records[0].0,
            format!("header has {} cells but rows have {width}", header.len()),
        ));
    };
    let mut row_labels = Vec::new();
    let mut entries = Vec::new();
    for (line, rec) in data {
        if rec.len() != col_labels.len() + 1 {
            return Err(Error::parse(
                *line,
                format!("expected a label and {} entries, found {} cells", col_labels.len(), rec.len()),
            ));
        }
        row_labels.push(rec[0].clone());
        let row = rec[1..]
            .iter()
            .map(|c| match c.as_str() {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::parse(*line, format!("entry {other:?} is not 0 or 1"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        entries.push(row);
    }
    Relation::new(row_labels, col_labels, entries).map_err(|e| match e {
        Error::InvalidInput(m) => Error::parse(1, m),
        other => other,
    })
}

pub fn write_relation_csv(r: &Relation) -> String {
    let mut out = String::new();
    out.push_str(&std::iter::once(String::new()).chain(r.col_labels().iter().map(|l| csv_field(l))).collect::<Vec<_>>().join(","));
    out.push('\n');
    for (i, label) in r.row_labels().iter().enumerate() {
        out.push_str(&csv_field(label));
        for j in 0..r.cols() {
            out.push_str(if r.get(i, j) { ",1" } else { ",0" });
        }
        out.push('\n');
    }
    out
}

/// Either an edge list or, when the text opens with `digraph`, the DOT
/// subset handled by [`parse_dot`].
pub fn parse_digraph(text: &str) -> Result<Digraph> {
    let first = text
        .lines()
        .map(|l| l.trim())
        .find(|l| !l.is_empty() && !l.starts_with('#') && !l.starts_with("//"));
    match first {
        Some(l) if l.starts_with("digraph") || l.starts_with("strict") || l.starts_with("graph") => parse_dot(text),
        _ => parse_edge_list(text),
    }
}

/// `u v` per line; a lone label adds an isolated vertex.
pub fn parse_edge_list(text: &str) -> Result<Digraph> {
    let mut vertices = Vec::new();
    let mut arcs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let parts: Vec<&str> = strip_hash_comment(raw).split_whitespace().collect();
        match parts.as_slice() {
            [] => {}
            [v] => vertices.push(v.to_string()),
            [u, v] => {
                if u == v {
                    return Err(Error::parse(n + 1, format!("self-loop at {u}")));
                }
                arcs.push((u.to_string(), v.to_string()));
            }
            _ => return Err(Error::parse(n + 1, "expected `u v`")),
        }
    }
    if vertices.is_empty() && arcs.is_empty() {
        return Err(Error::parse(1, "no vertices or arcs found"));
    }
    Digraph::from_labeled(&vertices, &arcs)
}

pub fn write_edge_list(d: &Digraph) -> String {
    let mut out = String::new();
    let mut touched = vec![false; d.vertex_count()];
    for (u, v) in d.arcs() {
        touched[u] = true;
        touched[v] = true;
        out.push_str(&format!("{} {}\n", d.labels()[u], d.labels()[v]));
    }
    for (i, t) in touched.iter().enumerate() {
        if !t {
            out.push_str(&format!("{}\n", d.labels()[i]));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
enum DotTok {
    Id(String),
    Arrow,
    Open,
    Close,
    Semi,
    Other(char),
    UndirectedEdge,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    /// Next token with the position it started at.
    fn next_token(&mut self) -> Result<Option<(DotTok, usize, usize)>> {
        loop {
            match self.peek() {
                None => return Ok(None),
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('#') => {
                    while self.peek().is_some_and(|c| c != '\n') {
                        self.bump();
                    }
                }
                Some('/') => {
                    let (line, col) = (self.line, self.col);
                    self.bump();
                    match self.bump() {
                        Some('/') => {
                            while self.peek().is_some_and(|c| c != '\n') {
                                self.bump();
                            }
                        }
                        Some('*') => {
                            let mut prev = ' ';
                            loop {
                                match self.bump() {
                                    None => return Err(Error::parse(line, format!("column {col}: unterminated comment"))),
                                    Some('/') if prev == '*' => break,
                                    Some(c) => prev = c,
                                }
                            }
                        }
                        _ => return Err(Error::parse(line, format!("column {col}: unexpected '/'"))),
                    }
                }
                Some(_) => break,
            }
        }
        let (line, col) = (self.line, self.col);
        let c = self.bump().unwrap();
        let tok = match c {
            '{' => DotTok::Open,
            '}' => DotTok::Close,
            ';' => DotTok::Semi,
            '-' if self.peek() == Some('>') => {
                self.bump();
                DotTok::Arrow
            }
            '-' if self.peek() == Some('-') => {
                self.bump();
                DotTok::UndirectedEdge
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match self.bump() {
                        None => return Err(Error::parse(line, format!("column {col}: unterminated string"))),
                        Some('\\') => {
                            if let Some(e) = self.bump() {
                                s.push(e);
                            }
                        }
                        Some('"') => break,
                        Some(ch) => s.push(ch),
                    }
                }
                DotTok::Id(s)
            }
            c if c.is_alphanumeric() || c == '_' || c == '.' || c == '-' => {
                let mut s = String::from(c);
                while let Some(n) = self.peek() {
                    if n.is_alphanumeric() || n == '_' || n == '.' {
                        s.push(n);
                        self.bump();
                    } else {
                        break;
                    }
                }
                DotTok::Id(s)
            }
            other => DotTok::Other(other),
        };
        Ok(Some((tok, line, col)))
    }
}

/// Directed DOT with node statements and edge chains only:
/// `digraph name { a; a -> b -> c; "x y" -> d }`. Attributes, subgraphs and
/// undirected graphs are rejected with their line and column.
pub fn parse_dot(text: &str) -> Result<Digraph> {
    let mut lx = Lexer {
        chars: text.char_indices().peekable(),
        line: 1,
        col: 1,
    };
    let mut toks = Vec::new();
    while let Some(t) = lx.next_token()? {
        toks.push(t);
    }
    let at = |i: usize| -> (usize, usize) {
        toks.get(i)
            .map(|t| (t.1, t.2))
            .unwrap_or((lx.line, lx.col))
    };
    let fail = |i: usize, msg: &str| -> Error {
        let (l, c) = at(i);
        Error::parse(l, format!("column {c}: {msg}"))
    };
    let mut i = 0;
    match toks.first() {
        Some((DotTok::Id(k), ..)) if k == "digraph" => i += 1,
        _ => return Err(fail(0, "expected `digraph` (only directed graphs without `strict` are supported)")),
    }
    if let Some((DotTok::Id(_), ..)) = toks.get(i) {
        i += 1;
    }
    if !matches!(toks.get(i), Some((DotTok::Open, ..))) {
        return Err(fail(i, "expected `{`"));
    }
    i += 1;
    let mut vertices = Vec::new();
    let mut arcs = Vec::new();
    loop {
        match toks.get(i) {
            None => return Err(fail(i, "missing closing `}`")),
            Some((DotTok::Close, ..)) => {
                i += 1;
                break;
            }
            Some((DotTok::Semi, ..)) => i += 1,
            Some((DotTok::Id(first), ..)) => {
                if matches!(first.as_str(), "node" | "edge" | "graph" | "subgraph") {
                    return Err(fail(i, &format!("`{first}` statements are not supported")));
                }
                let mut chain = vec![first.clone()];
                i += 1;
                loop {
                    match toks.get(i) {
                        Some((DotTok::Arrow, ..)) => match toks.get(i + 1) {
                            Some((DotTok::Id(next), ..)) => {
                                chain.push(next.clone());
                                i += 2;
                            }
                            _ => return Err(fail(i + 1, "expected a node id after `->`")),
                        },
                        Some((DotTok::UndirectedEdge, ..)) => {
                            return Err(fail(i, "undirected edge `--` in a digraph"))
                        }
                        Some((DotTok::Other('['), ..)) => return Err(fail(i, "attribute lists are not supported")),
                        Some((DotTok::Other('='), ..)) => {
                            return Err(fail(i, "graph attributes are not supported"))
                        }
                        _ => break,
                    }
                }
                if chain.len() == 1 {
                    vertices.push(chain.pop().unwrap());
                } else {
                    for w in chain.windows(2) {
                        if w[0] == w[1] {
                            return Err(fail(i.saturating_sub(1), &format!("self-loop at {}", w[0])));
                        }
                        arcs.push((w[0].clone(), w[1].clone()));
                    }
                }
            }
            Some((DotTok::Other(c), ..)) => return Err(fail(i, &format!("unexpected {c:?}"))),
            Some(_) => return Err(fail(i, "unexpected token")),
        }
    }
    if i < toks.len() {
        return Err(fail(i, "trailing input after the graph"));
    }
    Digraph::from_labeled(&vertices, &arcs)
}

pub fn parse_network_json(text: &str) -> Result<WirelessNetwork> {
    let net: WirelessNetwork =
        serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    net.validate()?;
    Ok(net)
}

pub fn write_network_json(w: &WirelessNetwork) -> String {
    serde_json::to_string_pretty(w).expect("network serialises")
}

/// One number per line; a non-numeric first line is taken as a CSV header.
pub fn parse_samples(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_content = false;
    for (n, raw) in text.lines().enumerate() {
        let line = strip_hash_comment(raw);
        if line.is_empty() {
            continue;
        }
        if line.contains(',') {
            return Err(Error::parse(n + 1, "expected a single column"));
        }
        let first = !seen_content;
        seen_content = true;
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => return Err(Error::parse(n + 1, format!("{line:?} is not finite"))),
            Err(_) if first => {}
            Err(_) => return Err(Error::parse(n + 1, format!("{line:?} is not a number"))),
        }
    }
    if out.is_empty() {
        return Err(Error::parse(1, "no samples found"));
    }
    Ok(out)
}
