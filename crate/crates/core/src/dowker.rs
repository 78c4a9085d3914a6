//! Relations, Dowker complexes and straight-line code.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::homology::{simplicial_chain_complex, BettiProfile, Field};

/// A 0/1 incidence matrix between labelled rows and columns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Relation {
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    entries: Vec<Vec<bool>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Vertices are rows; each column contributes the set of rows it meets.
    Rows,
    Cols,
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rows" | "row" => Ok(Side::Rows),
            "cols" | "col" | "columns" => Ok(Side::Cols),
            other => Err(Error::invalid(format!("unknown side {other:?}"))),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Rows => "rows",
            Side::Cols => "cols",
        })
    }
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    let mut seen = BTreeSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::invalid(format!("duplicate {what} label {l:?}")));
        }
    }
    Ok(())
}

impl Relation {
    pub fn new(row_labels: Vec<String>, col_labels: Vec<String>, entries: Vec<Vec<bool>>) -> Result<Self> {
        if entries.len() != row_labels.len() {
            return Err(Error::invalid(format!(
                "{} rows of entries for {} row labels",
                entries.len(),
                row_labels.len()
            )));
        }
        if let Some((i, r)) = entries.iter().enumerate().find(|(_, r)| r.len() != col_labels.len()) {
            return Err(Error::invalid(format!(
                "row {} has {} entries, expected {}",
                row_labels[i],
                r.len(),
                col_labels.len()
            )));
        }
        check_unique(&row_labels, "row")?;
        check_unique(&col_labels, "column")?;
        Ok(Relation {
            row_labels,
            col_labels,
            entries,
        })
    }

    /// Rows and columns labelled `1, 2, …`.
    pub fn from_matrix(m: &[Vec<u8>]) -> Result<Self> {
        let cols = m.first().map_or(0, |r| r.len());
        let entries: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|&x| x != 0).collect()).collect();
        Relation::new(
            (1..=m.len()).map(|i| i.to_string()).collect(),
            (1..=cols).map(|i| i.to_string()).collect(),
            entries,
        )
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.entries[i][j]
    }

    pub fn transpose(&self) -> Relation {
        let entries = (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.entries[i][j]).collect())
            .collect();
        Relation {
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
            entries,
        }
    }

    /// Rows `start..end`, keeping only columns with a 1 among them.
    pub fn window(&self, start: usize, end: usize) -> Relation {
        let keep: Vec<usize> = (0..self.cols())
            .filter(|&j| (start..end).any(|i| self.entries[i][j]))
            .collect();
        Relation {
            row_labels: self.row_labels[start..end].to_vec(),
            col_labels: keep.iter().map(|&j| self.col_labels[j].clone()).collect(),
            entries: (start..end)
                .map(|i| keep.iter().map(|&j| self.entries[i][j]).collect())
                .collect(),
        }
    }

    /// Row `i` as the set of column indices it meets.
    pub fn row_support(&self, i: usize) -> Vec<usize> {
        (0..self.cols()).filter(|&j| self.entries[i][j]).collect()
    }

    pub fn col_support(&self, j: usize) -> Vec<usize> {
        (0..self.rows()).filter(|&i| self.entries[i][j]).collect()
    }
}

/// Simplices on one side generated by the supports of the other side,
/// truncated at `max_dim` when given.
pub fn dowker_complex(r: &Relation, side: Side, max_dim: Option<usize>) -> Result<SimplicialComplex> {
    if r.is_empty() {
        return Err(Error::invalid("relation is empty"));
    }
    let (labels, gens): (Vec<String>, Vec<Vec<usize>>) = match side {
        Side::Rows => (
            r.row_labels.clone(),
            (0..r.cols()).map(|j| r.col_support(j)).collect(),
        ),
        Side::Cols => (
            r.col_labels.clone(),
            (0..r.rows()).map(|i| r.row_support(i)).collect(),
        ),
    };
    let gens = gens.into_iter().filter(|g| !g.is_empty()).collect();
    SimplicialComplex::from_id_facets(labels, gens, max_dim)
}

/// GF(2) Betti numbers in degrees `0..=max_betti_dim`, from simplices up to
/// one dimension higher.
pub fn dowker_betti(r: &Relation, side: Side, max_betti_dim: usize) -> Result<BettiProfile> {
    let k = dowker_complex(r, side, Some(max_betti_dim + 1))?;
    Ok(betti_to_degree(&k, max_betti_dim))
}

fn betti_to_degree(k: &SimplicialComplex, max_betti_dim: usize) -> BettiProfile {
    let cc = simplicial_chain_complex(k, Field::Gf2, Some(max_betti_dim + 1));
    let mut dims = cc.dims.clone();
    let mut ranks = cc.ranks();
    dims.resize(max_betti_dim + 2, 0);
    ranks.resize(max_betti_dim + 2, 0);
    BettiProfile::from_ranks(&dims, &ranks, max_betti_dim + 1)
}

/// Parses assignments `x = a + b * 2` (one per line, `#` comments, optional
/// trailing `;`) into an assignment × variable relation. The assigned
/// variable belongs to its own row; columns are ordered by first appearance
/// and rows are labelled `line:lhs`.
pub fn parse_straightline(source: &str) -> Result<Relation> {
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut col_labels: Vec<String> = Vec::new();
    let mut row_labels = Vec::new();
    let mut supports: Vec<Vec<usize>> = Vec::new();
    for (n, raw) in source.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split('#').next().unwrap().trim();
        let line = line.strip_suffix(';').unwrap_or(line).trim_end();
        if line.is_empty() {
            continue;
        }
        let tokens = tokenize(line).map_err(|m| Error::parse(line_no, m))?;
        let idents = parse_assignment(&tokens).map_err(|m| Error::parse(line_no, m))?;
        let mut support = Vec::new();
        for id in &idents {
            let j = *col_index.entry(id.to_string()).or_insert_with(|| {
                col_labels.push(id.to_string());
                col_labels.len() - 1
            });
            if !support.contains(&j) {
                support.push(j);
            }
        }
        row_labels.push(format!("{line_no}:{}", idents[0]));
        supports.push(support);
    }
    if row_labels.is_empty() {
        return Err(Error::parse(1, "no assignments found"));
    }
    let entries = supports
        .iter()
        .map(|s| {
            let mut row = vec![false; col_labels.len()];
            for &j in s {
                row[j] = true;
            }
            row
        })
        .collect();
    Relation::new(row_labels, col_labels, entries)
}

#[derive(Debug, PartialEq)]
enum Token<'a> {
    Ident(&'a str),
    Number,
    Op,
    Assign,
}

fn tokenize(line: &str) -> std::result::Result<Vec<Token<'_>>, String> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token::Ident(&line[start..i]));
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            let lit = &line[start..i];
            if lit.parse::<f64>().is_err() {
                return Err(format!("bad number {lit:?}"));
            }
            if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                return Err(format!("identifier cannot start with a digit near column {}", start + 1));
            }
            out.push(Token::Number);
        } else if matches!(c, b'+' | b'-' | b'*' | b'/') {
            out.push(Token::Op);
            i += 1;
        } else if c == b'=' {
            out.push(Token::Assign);
            i += 1;
        } else {
            let ch = line[i..].chars().next().unwrap();
            return Err(format!("unexpected character {ch:?} at column {}", i + 1));
        }
    }
    Ok(out)
}

/// Returns the identifiers in order, LHS first.
fn parse_assignment<'a>(tokens: &[Token<'a>]) -> std::result::Result<Vec<&'a str>, String> {
    let mut it = tokens.iter();
    let lhs = match it.next() {
        Some(Token::Ident(s)) => *s,
        _ => return Err("expected an identifier on the left of '='".into()),
    };
    if it.next() != Some(&Token::Assign) {
        return Err(format!("expected '=' after {lhs}"));
    }
    let mut idents = vec![lhs];
    let mut want_term = true;
    for t in it {
        match (want_term, t) {
            (true, Token::Ident(s)) => idents.push(s),
            (true, Token::Number) => {}
            (false, Token::Op) => {}
            (true, _) => return Err("expected an identifier or number".into()),
            (false, _) => return Err("expected an operator".into()),
        }
        want_term = !want_term;
    }
    if want_term {
        return Err("expression ends without a term".into());
    }
    Ok(idents)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowRow {
    pub start_label: String,
    pub betti: Vec<usize>,
    pub chi: i64,
    /// The complex has simplices above dimension 3, which the Euler
    /// characteristic leaves out.
    pub chi_truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WindowProfile {
    pub window_size: usize,
    pub rows: Vec<WindowRow>,
}

pub const DEFAULT_WINDOW: usize = 8;
pub const DEFAULT_MAX_BETTI_DIM: usize = 2;
const CHI_MAX_DIM: usize = 3;

/// Column-side Dowker homology and Euler characteristic of every run of `w`
/// consecutive rows.
pub fn windowed_profile(r: &Relation, w: usize, max_betti_dim: usize) -> Result<WindowProfile> {
    if w == 0 || w > r.rows() {
        return Err(Error::invalid(format!(
            "window size {w} must be between 1 and the row count {}",
            r.rows()
        )));
    }
    let rows = (0..=r.rows() - w)
        .into_par_iter()
        .map(|start| window_row(r, start, w, max_betti_dim))
        .collect::<Result<Vec<_>>>()?;
    Ok(WindowProfile { window_size: w, rows })
}

/// Profile of the whole relation as a single row.
pub fn whole_profile(r: &Relation, max_betti_dim: usize) -> Result<WindowProfile> {
    windowed_profile(r, r.rows(), max_betti_dim)
}

fn window_row(r: &Relation, start: usize, w: usize, max_betti_dim: usize) -> Result<WindowRow> {
    let sub = r.window(start, start + w);
    let cap = CHI_MAX_DIM.max(max_betti_dim + 1);
    let k = dowker_complex(&sub, Side::Cols, Some(cap))?;
    let betti = betti_to_degree(&k, max_betti_dim).betti;
    let chi = (0..=CHI_MAX_DIM)
        .map(|p| if p % 2 == 0 { k.count(p) as i64 } else { -(k.count(p) as i64) })
        .sum();
    let chi_truncated = (0..sub.rows()).any(|i| sub.row_support(i).len() > CHI_MAX_DIM + 1);
    Ok(WindowRow {
        start_label: sub.row_labels[0].clone(),
        betti,
        chi,
        chi_truncated,
    })
}

impl WindowProfile {
    pub fn to_csv(&self) -> String {
        let degrees = self.rows.first().map_or(3, |r| r.betti.len()).max(3);
        let mut out = String::from("start_label");
        for p in 0..degrees {
            out.push_str(&format!(",beta{p}"));
        }
        out.push_str(",chi,chi_truncated\n");
        for row in &self.rows {
            out.push_str(&csv_field(&row.start_label));
            for p in 0..degrees {
                out.push_str(&format!(",{}", row.betti.get(p).copied().unwrap_or(0)));
            }
            out.push_str(&format!(",{},{}\n", row.chi, row.chi_truncated));
        }
        out
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_relation() -> Relation {
        Relation::from_matrix(&[
            vec![0, 1, 0, 0, 0, 1, 0],
            vec![0, 0, 0, 1, 0, 1, 1],
            vec![1, 1, 0, 1, 0, 0, 1],
            vec![1, 0, 0, 1, 0, 0, 0],
            vec![0, 0, 1, 0, 1, 0, 0],
        ])
        .unwrap()
    }

    #[test]
    fn example_relation_gives_simple_complex() {
        let k = dowker_complex(&example_relation(), Side::Rows, None).unwrap();
        let facets: Vec<Vec<String>> = k.facets().iter().map(|f| k.label_simplex(f)).collect();
        let mut want = vec![vec!["1", "2"], vec!["1", "3"], vec!["2", "3", "4"], vec!["5"]];
        want.sort();
        let mut got: Vec<Vec<&str>> = facets.iter().map(|f| f.iter().map(|s| s.as_str()).collect()).collect();
        got.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn example_relation_betti_both_sides() {
        let r = example_relation();
        assert_eq!(dowker_betti(&r, Side::Rows, 2).unwrap().betti, vec![2, 1, 0]);
        assert_eq!(dowker_betti(&r, Side::Cols, 2).unwrap().betti, vec![2, 1, 0]);
    }

    #[test]
    fn identity_and_all_ones() {
        let id = Relation::from_matrix(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        for side in [Side::Rows, Side::Cols] {
            let k = dowker_complex(&id, side, None).unwrap();
            assert_eq!(k.count(0), 3);
            assert_eq!(k.count(1), 0);
        }
        let ones = Relation::from_matrix(&[vec![1, 1, 1], vec![1, 1, 1]]).unwrap();
        let k = dowker_complex(&ones, Side::Cols, None).unwrap();
        assert_eq!(k.dim(), Some(2));
        assert_eq!(k.facets().len(), 1);
        let one = Relation::from_matrix(&[vec![1]]).unwrap();
        assert_eq!(dowker_betti(&one, Side::Rows, 2).unwrap().betti, vec![1, 0, 0]);
    }

    #[test]
    fn empty_relation_rejected() {
        let r = Relation::new(vec![], vec![], vec![]).unwrap();
        assert!(dowker_complex(&r, Side::Rows, None).is_err());
    }

    #[test]
    fn parse_two_lines() {
        let r = parse_straightline("q = a + b\nx = q * c").unwrap();
        assert_eq!(r.rows(), 2);
        assert_eq!(r.col_labels(), ["q", "a", "b", "x", "c"]);
        assert_eq!(r.row_support(0), vec![0, 1, 2]);
        assert_eq!(r.row_support(1), vec![0, 3, 4]);
        assert_eq!(r.row_labels(), ["1:q", "2:x"]);
    }

    #[test]
    fn parse_numbers_comments_semicolons() {
        let src = "# header\n\ny = x * 2.5;  # scale\nz = 3\n";
        let r = parse_straightline(src).unwrap();
        assert_eq!(r.col_labels(), ["y", "x", "z"]);
        assert_eq!(r.row_labels(), ["3:y", "4:z"]);
    }

    #[test]
    fn parse_errors_carry_line() {
        for (src, line) in [
            ("", 1),
            ("# nothing\n", 1),
            ("a = b\nc = + d", 2),
            ("a = b +", 1),
            ("a b", 1),
            ("x = (a)", 1),
            ("\n\n3 = a", 3),
            ("a = 2b", 1),
        ] {
            match parse_straightline(src) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{src:?}"),
                other => panic!("{src:?} gave {other:?}"),
            }
        }
    }

    #[test]
    fn window_extremes() {
        let r = example_relation();
        let whole = windowed_profile(&r, r.rows(), 2).unwrap();
        assert_eq!(whole.rows.len(), 1);
        assert_eq!(whole.rows[0].betti, dowker_betti(&r, Side::Cols, 2).unwrap().betti);
        let ones = windowed_profile(&r, 1, 2).unwrap();
        assert_eq!(ones.rows.len(), 5);
        assert!(ones.rows.iter().all(|w| w.betti == vec![1, 0, 0] && w.chi == 1));
        assert!(windowed_profile(&r, 0, 2).is_err());
        assert!(windowed_profile(&r, 6, 2).is_err());
    }

    #[test]
    fn chi_truncation_flag() {
        let r = parse_straightline("a = b + c + d + e").unwrap();
        let p = whole_profile(&r, 2).unwrap();
        assert!(p.rows[0].chi_truncated);
        // 5 − 10 + 10 − 5 of the 4-simplex's faces up to dimension 3
        assert_eq!(p.rows[0].chi, 0);
        let r = parse_straightline("a = b + c + d").unwrap();
        let p = whole_profile(&r, 2).unwrap();
        assert!(!p.rows[0].chi_truncated);
        assert_eq!(p.rows[0].chi, 1);
    }

    #[test]
    fn csv_layout() {
        let r = parse_straightline("q = a + b\nx = q * c\ny = z").unwrap();
        let csv = windowed_profile(&r, 2, 2).unwrap().to_csv();
        assert_eq!(
            csv,
            "start_label,beta0,beta1,beta2,chi,chi_truncated\n1:q,1,0,0,1,false\n2:x,2,0,0,2,false\n"
        );
    }
}
