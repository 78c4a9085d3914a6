//! Abstract simplicial complexes.
//!
//! Vertices are dense `usize` ids; the original labels are kept alongside so
//! reports can print them. Every simplex is stored as a strictly ascending
//! vertex tuple, which fixes the orientation used by the boundary maps.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

/// A nonempty, strictly ascending list of vertex ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    /// Builds a simplex from vertex ids in any order. Duplicates and the
    /// empty set are rejected.
    pub fn new(mut vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::invalid("empty simplex"));
        }
        vertices.sort_unstable();
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Simplex(vec![v])
    }

    /// Caller guarantees `vertices` is nonempty and strictly ascending.
    pub(crate) fn from_sorted(vertices: Vec<usize>) -> Self {
        debug_assert!(!vertices.is_empty());
        debug_assert!(vertices.windows(2).all(|w| w[0] < w[1]));
        Simplex(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn contains_vertex(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `true` when every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut it = other.0.iter();
        'outer: for v in &self.0 {
            for w in it.by_ref() {
                if w == v {
                    continue 'outer;
                }
                if w > v {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// The codimension-one face obtained by deleting position `j`.
    pub fn delete(&self, j: usize) -> Option<Simplex> {
        if self.0.len() < 2 {
            return None;
        }
        let mut v = self.0.clone();
        v.remove(j);
        Some(Simplex(v))
    }

    /// Codimension-one faces in deletion order `j = 0..=dim`.
    pub fn boundary_faces(&self) -> impl Iterator<Item = (usize, Simplex)> + '_ {
        (0..self.0.len()).filter_map(move |j| self.delete(j).map(|f| (j, f)))
    }

    /// All nonempty subsets, including `self`.
    pub fn all_faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        assert!(n < usize::BITS as usize, "simplex too large to enumerate faces");
        (1usize..(1 << n))
            .map(|mask| {
                Simplex(
                    (0..n)
                        .filter(|i| mask & (1 << i) != 0)
                        .map(|i| self.0[i])
                        .collect(),
                )
            })
            .collect()
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let mut v: Vec<usize> = self.0.iter().chain(other.0.iter()).copied().collect();
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// A finite abstract simplicial complex, closed under nonempty subsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    labels: Vec<String>,
    /// `by_dim[p]` holds the p-simplices in lexicographic order.
    by_dim: Vec<Vec<Simplex>>,
    index: HashMap<Simplex, usize>,
}

/// Orders labels numerically when they all parse as integers, otherwise
/// lexicographically.
fn natural_order(labels: &mut [String]) {
    if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
        labels.sort_by_key(|l| l.parse::<i64>().unwrap());
    } else {
        labels.sort();
    }
}

impl SimplicialComplex {
    pub fn empty() -> Self {
        SimplicialComplex {
            labels: Vec::new(),
            by_dim: Vec::new(),
            index: HashMap::new(),
        }
    }

    /// All nonempty subsets of the given label sets.
    pub fn from_facets<S: AsRef<str>>(facets: &[Vec<S>]) -> Result<Self> {
        Self::from_facets_capped(facets, None)
    }

    /// Like [`from_facets`](Self::from_facets), keeping only simplices of
    /// dimension at most `max_dim`.
    pub fn from_facets_capped<S: AsRef<str>>(
        facets: &[Vec<S>],
        max_dim: Option<usize>,
    ) -> Result<Self> {
        let mut labels: Vec<String> = facets
            .iter()
            .flat_map(|f| f.iter().map(|s| s.as_ref().to_string()))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        natural_order(&mut labels);
        let ids: HashMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut id_facets = Vec::with_capacity(facets.len());
        for f in facets {
            if f.is_empty() {
                return Err(Error::invalid("empty facet"));
            }
            let mut vs: Vec<usize> = f.iter().map(|s| ids[s.as_ref()]).collect();
            vs.sort_unstable();
            vs.dedup();
            id_facets.push(vs);
        }
        Self::from_id_facets(labels, id_facets, max_dim)
    }

    /// Builds a complex over vertex ids `0..labels.len()` from generating
    /// sets of ids. Vertices not mentioned in any set are not added.
    pub fn from_id_facets(
        labels: Vec<String>,
        facets: Vec<Vec<usize>>,
        max_dim: Option<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut all: BTreeSet<Simplex> = BTreeSet::new();
        // Sort and drop generators contained in others; this keeps the
        // power-set enumeration proportional to the true facet count.
        let mut gens: Vec<Simplex> = Vec::new();
        for f in facets {
            if f.iter().any(|&v| v >= n) {
                return Err(Error::invalid(format!("vertex id out of range in {f:?}")));
            }
            gens.push(Simplex::new(f)?);
        }
        gens.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.cmp(b)));
        gens.dedup();
        let mut maximal: Vec<Simplex> = Vec::new();
        for g in gens {
            if !maximal.iter().any(|m| g.is_face_of(m)) {
                maximal.push(g);
            }
        }
        for f in &maximal {
            insert_faces(&mut all, f, max_dim);
        }
        Ok(Self::from_closed_set(labels, all))
    }

    /// Caller guarantees `set` is downward closed.
    pub(crate) fn from_closed_set(labels: Vec<String>, set: BTreeSet<Simplex>) -> Self {
        let top = set.iter().map(|s| s.dim()).max();
        let mut by_dim: Vec<Vec<Simplex>> = match top {
            Some(t) => vec![Vec::new(); t + 1],
            None => Vec::new(),
        };
        for s in set {
            by_dim[s.dim()].push(s);
        }
        for layer in &mut by_dim {
            layer.sort();
        }
        let index = by_dim
            .iter()
            .flat_map(|layer| layer.iter().enumerate().map(|(i, s)| (s.clone(), i)))
            .collect();
        SimplicialComplex {
            labels,
            by_dim,
            index,
        }
    }

    /// The subcomplex formed by a downward-closed subset of simplices.
    pub fn subcomplex(&self, set: &BTreeSet<Simplex>) -> Result<Self> {
        for s in set {
            if !self.contains(s) {
                return Err(Error::invalid(format!("{s} is not in the complex")));
            }
        }
        if !self.is_closed(set) {
            return Err(Error::invalid("subset is not closed under faces"));
        }
        Ok(Self::from_closed_set(self.labels.clone(), set.clone()))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, v: usize) -> &str {
        &self.labels[v]
    }

    pub fn vertex_id(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Parses a simplex written as labels.
    pub fn simplex_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Simplex> {
        let ids = labels
            .iter()
            .map(|l| {
                self.vertex_id(l.as_ref())
                    .ok_or_else(|| Error::invalid(format!("unknown vertex label {:?}", l.as_ref())))
            })
            .collect::<Result<Vec<_>>>()?;
        Simplex::new(ids)
    }

    pub fn label_simplex(&self, s: &Simplex) -> Vec<String> {
        s.vertices().iter().map(|&v| self.labels[v].clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    /// Dimension of the complex, `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.by_dim.len().checked_sub(1)
    }

    /// p-simplices in lexicographic order (empty slice beyond the top).
    pub fn simplices(&self, p: usize) -> &[Simplex] {
        self.by_dim.get(p).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn count(&self, p: usize) -> usize {
        self.simplices(p).len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.by_dim.iter().flatten()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index.contains_key(s)
    }

    /// Position of `s` in the lexicographic basis of its dimension.
    pub fn position(&self, s: &Simplex) -> Option<usize> {
        self.index.get(s).copied()
    }

    /// Vertex ids that appear in the complex.
    pub fn vertex_ids(&self) -> Vec<usize> {
        self.simplices(0).iter().map(|s| s.0[0]).collect()
    }

    /// Simplices with no proper coface.
    pub fn facets(&self) -> Vec<Simplex> {
        let covered: std::collections::HashSet<Simplex> = self
            .iter()
            .flat_map(|s| s.boundary_faces().map(|(_, f)| f))
            .collect();
        self.iter().filter(|s| !covered.contains(*s)).cloned().collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.by_dim
            .iter()
            .enumerate()
            .map(|(p, l)| if p % 2 == 0 { l.len() as i64 } else { -(l.len() as i64) })
            .sum()
    }

    fn check_members<'a>(&self, a: impl IntoIterator<Item = &'a Simplex>) -> Result<()> {
        for s in a {
            if !self.contains(s) {
                return Err(Error::invalid(format!("{s} is not in the complex")));
            }
        }
        Ok(())
    }

    /// Smallest closed set containing `a`.
    pub fn closure<'a>(&self, a: impl IntoIterator<Item = &'a Simplex>) -> Result<BTreeSet<Simplex>> {
        let a: Vec<&Simplex> = a.into_iter().collect();
        self.check_members(a.iter().copied())?;
        let mut out = BTreeSet::new();
        for s in a {
            for f in s.all_faces() {
                out.insert(f);
            }
        }
        Ok(out)
    }

    /// All simplices having some element of `a` as a face.
    pub fn star<'a>(&self, a: impl IntoIterator<Item = &'a Simplex>) -> Result<BTreeSet<Simplex>> {
        let a: Vec<&Simplex> = a.into_iter().collect();
        self.check_members(a.iter().copied())?;
        Ok(self
            .iter()
            .filter(|s| a.iter().any(|x| x.is_face_of(s)))
            .cloned()
            .collect())
    }

    pub fn is_closed(&self, a: &BTreeSet<Simplex>) -> bool {
        a.iter()
            .all(|s| s.boundary_faces().all(|(_, f)| a.contains(&f)))
    }

    /// Open sets are unions of stars, i.e. closed under taking cofaces.
    pub fn is_open(&self, a: &BTreeSet<Simplex>) -> bool {
        self.iter()
            .filter(|s| !a.contains(*s))
            .all(|s| s.boundary_faces().all(|(_, f)| !a.contains(&f)))
    }

    pub fn complement(&self, a: &BTreeSet<Simplex>) -> BTreeSet<Simplex> {
        self.iter().filter(|s| !a.contains(*s)).cloned().collect()
    }

    /// Clique complex of a simple undirected graph on `labels.len()` vertices.
    pub fn clique_complex(
        labels: Vec<String>,
        edges: &[(usize, usize)],
        max_dim: Option<usize>,
    ) -> Result<Self> {
        let n = labels.len();
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            adj[u][v] = true;
            adj[v][u] = true;
        }
        let mut cliques = Vec::new();
        let p: Vec<usize> = (0..n).collect();
        bron_kerbosch(&adj, &mut Vec::new(), p, Vec::new(), &mut cliques);
        Self::from_id_facets(labels, cliques, max_dim)
    }
}

fn insert_faces(all: &mut BTreeSet<Simplex>, f: &Simplex, max_dim: Option<usize>) {
    let n = f.0.len();
    let cap = max_dim.map_or(n, |d| (d + 1).min(n));
    // Enumerate subsets of size 1..=cap by index combinations.
    let mut idx: Vec<usize> = Vec::with_capacity(cap);
    fn rec(
        f: &[usize],
        start: usize,
        cap: usize,
        idx: &mut Vec<usize>,
        all: &mut BTreeSet<Simplex>,
    ) {
        for i in start..f.len() {
            idx.push(f[i]);
            all.insert(Simplex(idx.clone()));
            if idx.len() < cap {
                rec(f, i + 1, cap, idx, all);
            }
            idx.pop();
        }
    }
    rec(&f.0, 0, cap, &mut idx, all);
}

/// Maximal cliques with pivoting.
fn bron_kerbosch(
    adj: &[Vec<bool>],
    r: &mut Vec<usize>,
    p: Vec<usize>,
    x: Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        if !r.is_empty() {
            out.push(r.clone());
        }
        return;
    }
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .unwrap();
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    let mut p = p;
    let mut x = x;
    for v in candidates {
        r.push(v);
        let np = p.iter().copied().filter(|&w| adj[v][w]).collect();
        let nx = x.iter().copied().filter(|&w| adj[v][w]).collect();
        bron_kerbosch(adj, r, np, nx, out);
        r.pop();
        p.retain(|&w| w != v);
        x.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_asc() -> SimplicialComplex {
        SimplicialComplex::from_facets(&[
            vec!["1", "2"],
            vec!["1", "3"],
            vec!["2", "3", "4"],
            vec!["5"],
        ])
        .unwrap()
    }

    fn s(k: &SimplicialComplex, labels: &[&str]) -> Simplex {
        k.simplex_of(labels).unwrap()
    }

    fn set(k: &SimplicialComplex, items: &[&[&str]]) -> BTreeSet<Simplex> {
        items.iter().map(|l| s(k, l)).collect()
    }

    #[test]
    fn simple_asc_counts_and_facets() {
        let k = simple_asc();
        assert_eq!(k.len(), 11);
        assert_eq!((k.count(0), k.count(1), k.count(2)), (5, 5, 1));
        let facets: BTreeSet<Simplex> = k.facets().into_iter().collect();
        assert_eq!(
            facets,
            set(&k, &[&["1", "2"], &["1", "3"], &["2", "3", "4"], &["5"]])
        );
    }

    #[test]
    fn trivial_constructions() {
        let k = SimplicialComplex::from_facets(&[vec!["1"]]).unwrap();
        assert_eq!(k.len(), 1);
        let k = SimplicialComplex::from_facets(&[vec!["1", "2", "3"]]).unwrap();
        assert_eq!(k.len(), 7);
        let empty: Vec<&str> = vec![];
        assert!(SimplicialComplex::from_facets(&[empty]).is_err());
    }

    #[test]
    fn absorbed_facets() {
        let k = SimplicialComplex::from_facets(&[vec!["a", "b", "c"], vec!["a", "b"]]).unwrap();
        assert_eq!(k.facets().len(), 1);
    }

    #[test]
    fn closure_examples() {
        let k = simple_asc();
        let cl = k.closure([&s(&k, &["2", "4"])]).unwrap();
        assert_eq!(cl, set(&k, &[&["2", "4"], &["2"], &["4"]]));
        assert!(k.is_closed(&cl));
        let five = set(&k, &[&["5"]]);
        assert_eq!(k.closure(&five).unwrap(), five);
        assert!(k.is_closed(&five) && k.is_open(&five));
        assert!(k.closure(std::iter::empty()).unwrap().is_empty());
    }

    #[test]
    fn star_examples() {
        let k = simple_asc();
        let b = k.star([&s(&k, &["1"]), &s(&k, &["5"])]).unwrap();
        assert_eq!(b, set(&k, &[&["1", "2"], &["1", "3"], &["1"], &["5"]]));
        assert!(k.is_open(&b));
        let f = s(&k, &["2", "3", "4"]);
        assert_eq!(k.star([&f]).unwrap(), [f.clone()].into_iter().collect());
        // brute-force coface scan
        let two = s(&k, &["2"]);
        let scan: BTreeSet<Simplex> = k.iter().filter(|x| x.contains_vertex(two.vertices()[0])).cloned().collect();
        assert_eq!(k.star([&two]).unwrap(), scan);
        assert_eq!(
            scan,
            set(&k, &[&["2"], &["1", "2"], &["2", "3"], &["2", "4"], &["2", "3", "4"]])
        );
    }

    #[test]
    fn membership_errors() {
        let k = simple_asc();
        let bogus = Simplex::new(vec![0, 4]).unwrap();
        assert!(k.closure([&bogus]).is_err());
        assert!(k.star([&bogus]).is_err());
    }

    #[test]
    fn clique_complexes() {
        let labels = |n: usize| (1..=n).map(|i| i.to_string()).collect::<Vec<_>>();
        let tri = SimplicialComplex::clique_complex(labels(3), &[(0, 1), (1, 2), (0, 2)], None).unwrap();
        assert_eq!(tri.len(), 7);
        let sq = SimplicialComplex::clique_complex(labels(4), &[(0, 1), (1, 2), (2, 3), (3, 0)], None)
            .unwrap();
        assert_eq!((sq.count(0), sq.count(1), sq.count(2)), (4, 4, 0));
        let capped = SimplicialComplex::clique_complex(
            labels(5),
            &[(0, 1), (0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
            Some(2),
        )
        .unwrap();
        assert_eq!(capped.dim(), Some(2));
        assert_eq!(capped.count(2), 10);
    }

    #[test]
    fn simplex_face_relation() {
        let a = Simplex::new(vec![1, 3]).unwrap();
        let b = Simplex::new(vec![0, 1, 2, 3]).unwrap();
        assert!(a.is_face_of(&b));
        assert!(!b.is_face_of(&a));
        assert!(!Simplex::new(vec![1, 4]).unwrap().is_face_of(&b));
        assert!(Simplex::new(vec![2, 2]).is_err());
    }
}
