//! Wireless network topology: link and interference complexes, the
//! activation sheaf and its sections, regions of influence, local homology
//! criticality, the vector activation sheaf, and a shortest-path traffic
//! model used to label busy forwarders.
//!
//! Coverage follows a disk model: node `i` at `p_i` with radius `r_i` is
//! decodable exactly on the open disk `|x − p_i| < r_i`.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::homology::local_homology_profile;
use crate::linalg::{ExactMatrix, Field};

/// Radii are shrunk by this much (meters) before testing for a common point,
/// so tangent disks do not count as overlapping.
const DISK_MARGIN: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WirelessNode {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

impl WirelessNode {
    fn dist(&self, other: &WirelessNode) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WirelessNetwork {
    pub nodes: Vec<WirelessNode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    #[default]
    Link,
    Interference,
}

impl std::str::FromStr for ComplexKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "link" => Ok(ComplexKind::Link),
            "interference" => Ok(ComplexKind::Interference),
            other => Err(Error::invalid(format!("unknown complex kind {other:?}"))),
        }
    }
}

impl WirelessNetwork {
    pub fn new(nodes: Vec<WirelessNode>) -> Result<Self> {
        let net = WirelessNetwork { nodes };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("network has no nodes"));
        }
        let mut seen = BTreeSet::new();
        for n in &self.nodes {
            if !seen.insert(n.id.as_str()) {
                return Err(Error::invalid(format!("duplicate node id {:?}", n.id)));
            }
            if !(n.x.is_finite() && n.y.is_finite()) {
                return Err(Error::invalid(format!("node {:?} has a non-finite position", n.id)));
            }
            if !(n.radius.is_finite() && n.radius > 0.0) {
                return Err(Error::invalid(format!("node {:?} needs a positive radius", n.id)));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn labels(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.id.clone()).collect()
    }

    /// `n` nodes placed uniformly in a `side × side` square, all with the
    /// same radius. Ids are `"0".."n-1"`.
    pub fn random_geometric(n: usize, side: f64, radius: f64, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nodes = (0..n)
            .map(|i| WirelessNode {
                id: i.to_string(),
                x: rng.random::<f64>() * side,
                y: rng.random::<f64>() * side,
                radius,
            })
            .collect();
        WirelessNetwork::new(nodes)
    }

    /// Pairs that decode each other: `dist < min(r_i, r_j)`.
    pub fn link_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.nodes.len() {
            for j in i + 1..self.nodes.len() {
                let (a, b) = (&self.nodes[i], &self.nodes[j]);
                if a.dist(b) < a.radius.min(b.radius) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (u, v) in self.link_edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn common_point(&self, members: &[usize]) -> bool {
        let disks: Vec<(f64, f64, f64)> = members
            .iter()
            .map(|&i| {
                let n = &self.nodes[i];
                (n.x, n.y, n.radius - 2.0 * DISK_MARGIN)
            })
            .collect();
        if disks.iter().any(|d| d.2 <= 0.0) {
            return false;
        }
        let inside = |px: f64, py: f64| {
            disks
                .iter()
                .all(|&(x, y, r)| (px - x).hypot(py - y) <= r + DISK_MARGIN)
        };
        if disks.iter().any(|&(x, y, _)| inside(x, y)) {
            return true;
        }
        for i in 0..disks.len() {
            for j in i + 1..disks.len() {
                for (px, py) in circle_intersections(disks[i], disks[j]) {
                    if inside(px, py) {
                        return true;
                    }
                }
            }
        }
        false
    }

    pub fn link_complex(&self, max_dim: Option<usize>) -> Result<SimplicialComplex> {
        SimplicialComplex::clique_complex(self.labels(), &self.link_edges(), max_dim)
    }

    /// Čech complex of the coverage disks.
    pub fn interference_complex(&self, max_dim: Option<usize>) -> Result<SimplicialComplex> {
        let n = self.nodes.len();
        let mut all: BTreeSet<Simplex> = BTreeSet::new();
        let mut frontier: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        while let Some(s) = frontier.pop() {
            let last = *s.last().unwrap();
            if max_dim.is_none_or(|d| s.len() <= d) {
                for v in last + 1..n {
                    let mut t = s.clone();
                    t.push(v);
                    if self.common_point(&t) {
                        frontier.push(t);
                    }
                }
            }
            all.insert(Simplex::from_sorted(s));
        }
        Ok(SimplicialComplex::from_closed_set(self.labels(), all))
    }

    pub fn complex(&self, kind: ComplexKind, max_dim: Option<usize>) -> Result<SimplicialComplex> {
        match kind {
            ComplexKind::Link => self.link_complex(max_dim),
            ComplexKind::Interference => self.interference_complex(max_dim),
        }
    }
}

fn circle_intersections(a: (f64, f64, f64), b: (f64, f64, f64)) -> Vec<(f64, f64)> {
    let (x0, y0, r0) = a;
    let (x1, y1, r1) = b;
    let d = (x1 - x0).hypot(y1 - y0);
    if d == 0.0 || d > r0 + r1 || d < (r0 - r1).abs() {
        return Vec::new();
    }
    let along = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
    let h = (r0 * r0 - along * along).max(0.0).sqrt();
    let (ux, uy) = ((x1 - x0) / d, (y1 - y0) / d);
    let (mx, my) = (x0 + along * ux, y0 + along * uy);
    vec![(mx - h * uy, my + h * ux), (mx + h * uy, my - h * ux)]
}

/// `star(cl(star c))`: the star over the region a transmission at `c`
/// locks. For a facet this is `star(cl c)`. Its complement is a closed
/// subcomplex.
pub fn region_of_influence(k: &SimplicialComplex, c: &Simplex) -> Result<BTreeSet<Simplex>> {
    let st = k.star([c])?;
    let cl = k.closure(st.iter())?;
    k.star(cl.iter())
}

/// A stalk value: a node id, or `None` for the idle symbol ⊥.
pub type Activation = Option<usize>;

/// Activation sheaf over a complex whose vertices are network nodes.
#[derive(Clone, Debug)]
pub struct ActivationSheaf {
    base: SimplicialComplex,
    /// Node ids (⊥ excluded) sharing a coface with each simplex, ascending.
    stalks: HashMap<Simplex, Vec<usize>>,
}

/// An assignment of stalk values on a subset of the base.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SheafSection {
    pub assignment: BTreeMap<Simplex, Activation>,
}

impl SheafSection {
    pub fn support(&self) -> impl Iterator<Item = &Simplex> {
        self.assignment.keys()
    }

    pub fn get(&self, c: &Simplex) -> Option<Activation> {
        self.assignment.get(c).copied()
    }

    /// Nodes `n` with `s([n]) = n`.
    pub fn transmitting(&self) -> Vec<usize> {
        self.assignment
            .iter()
            .filter(|(c, v)| c.dim() == 0 && **v == Some(c.vertices()[0]))
            .map(|(c, _)| c.vertices()[0])
            .collect()
    }
}

impl ActivationSheaf {
    pub fn new(base: SimplicialComplex) -> Result<Self> {
        if base.is_empty() {
            return Err(Error::invalid("activation sheaf needs a nonempty base"));
        }
        // n shares a coface with c exactly when c ∪ {n} is a simplex.
        let vertices = base.vertex_ids();
        let stalks = base
            .iter()
            .map(|c| {
                let stalk = vertices
                    .iter()
                    .copied()
                    .filter(|&n| c.contains_vertex(n) || base.contains(&c.union(&Simplex::vertex(n))))
                    .collect();
                (c.clone(), stalk)
            })
            .collect();
        Ok(ActivationSheaf { base, stalks })
    }

    pub fn base(&self) -> &SimplicialComplex {
        &self.base
    }

    pub fn stalk(&self, c: &Simplex) -> Option<&[usize]> {
        self.stalks.get(c).map(|v| v.as_slice())
    }

    fn in_stalk(&self, c: &Simplex, v: Activation) -> bool {
        match v {
            None => true,
            Some(n) => self.stalks[c].binary_search(&n).is_ok(),
        }
    }

    /// Restriction along `c ⊆ d`.
    pub fn restrict(&self, d: &Simplex, v: Activation) -> Activation {
        v.filter(|&n| self.stalks[d].binary_search(&n).is_ok())
    }

    /// Checks stalk membership and every restriction between supported pairs.
    pub fn is_section(&self, s: &SheafSection) -> bool {
        for (c, &v) in &s.assignment {
            if !self.stalks.contains_key(c) || !self.in_stalk(c, v) {
                return false;
            }
        }
        for (c, &v) in &s.assignment {
            for (d, &w) in &s.assignment {
                if c != d && c.is_face_of(d) && self.restrict(d, v) != w {
                    return false;
                }
            }
        }
        true
    }

    /// Completes vertex values to a full assignment if they are consistent.
    fn complete(&self, vertex_values: &HashMap<usize, Activation>) -> Option<SheafSection> {
        let mut assignment = BTreeMap::new();
        for c in self.base.iter() {
            let v = vertex_values[&c.vertices()[0]];
            assignment.insert(c.clone(), self.restrict(c, v));
        }
        for d in self.base.iter() {
            for (_, c) in d.boundary_faces() {
                if self.restrict(d, assignment[&c]) != assignment[d] {
                    return None;
                }
            }
        }
        Some(SheafSection { assignment })
    }

    /// Global sections by backtracking over vertex values, pruning on edges
    /// whose two restrictions disagree. Stops after `limit` sections.
    pub fn global_sections(&self, limit: Option<usize>) -> Vec<SheafSection> {
        let mut out = Vec::new();
        self.visit_global_sections(limit, &mut |s| out.push(s));
        out
    }

    /// Counts global sections, giving up after `limit`. Returns the count and
    /// whether the enumeration finished.
    pub fn count_global_sections(&self, limit: usize) -> (usize, bool) {
        let mut n = 0;
        self.visit_global_sections(Some(limit + 1), &mut |_| n += 1);
        (n.min(limit), n <= limit)
    }

    fn visit_global_sections(&self, limit: Option<usize>, f: &mut dyn FnMut(SheafSection)) {
        let vertices = self.base.vertex_ids();
        let edges: Vec<&Simplex> = self.base.simplices(1).iter().collect();
        let mut values: HashMap<usize, Activation> = HashMap::new();
        let mut count = 0;
        self.backtrack(&vertices, 0, &edges, &mut values, &mut count, limit, f);
    }

    #[allow(clippy::too_many_arguments)]
    fn backtrack(
        &self,
        vertices: &[usize],
        i: usize,
        edges: &[&Simplex],
        values: &mut HashMap<usize, Activation>,
        count: &mut usize,
        limit: Option<usize>,
        f: &mut dyn FnMut(SheafSection),
    ) {
        if limit.is_some_and(|l| *count >= l) {
            return;
        }
        if i == vertices.len() {
            if let Some(s) = self.complete(values) {
                *count += 1;
                f(s);
            }
            return;
        }
        let v = vertices[i];
        let vs = Simplex::vertex(v);
        let choices = std::iter::once(None).chain(self.stalks[&vs].iter().map(|&n| Some(n)));
        for choice in choices {
            // a vertex waiting on n forces n to be transmitting
            if let Some(n) = choice {
                if n != v {
                    if let Some(&w) = values.get(&n) {
                        if w != Some(n) {
                            continue;
                        }
                    }
                }
            }
            let ok = edges.iter().filter(|e| e.contains_vertex(v)).all(|e| {
                let u = if e.vertices()[0] == v { e.vertices()[1] } else { e.vertices()[0] };
                match values.get(&u) {
                    Some(&uv) => self.restrict(e, uv) == self.restrict(e, choice),
                    None => true,
                }
            }) && values.iter().all(|(&u, &uv)| uv != Some(v) || choice == Some(v) || u == v);
            if !ok {
                continue;
            }
            values.insert(v, choice);
            self.backtrack(vertices, i + 1, edges, values, count, limit, f);
            values.remove(&v);
            if limit.is_some_and(|l| *count >= l) {
                return;
            }
        }
    }

    /// Whether some global section agrees with `partial` on its support.
    pub fn extends_globally(&self, partial: &SheafSection) -> bool {
        if !self.is_section(partial) {
            return false;
        }
        let mut found = false;
        self.visit_global_sections(None, &mut |s| {
            if !found && partial.assignment.iter().all(|(c, v)| s.assignment.get(c) == Some(v)) {
                found = true;
            }
        });
        found
    }

    /// `{c : s(c) = n}`; empty when `n` is not transmitting in `s`.
    pub fn active_region(&self, s: &SheafSection, n: usize) -> BTreeSet<Simplex> {
        s.assignment
            .iter()
            .filter(|(_, v)| **v == Some(n))
            .map(|(c, _)| c.clone())
            .collect()
    }

    /// Dimensions of `H^k` of the vector activation sheaf, `k = 0..=dim`.
    pub fn vector_cohomology(&self) -> Result<Vec<usize>> {
        let Some(top) = self.base.dim() else {
            return Ok(Vec::new());
        };
        // Cochain basis of degree k: (simplex, node in its stalk).
        let bases: Vec<HashMap<(&Simplex, usize), usize>> = (0..=top)
            .map(|k| {
                self.base
                    .simplices(k)
                    .iter()
                    .flat_map(|c| self.stalks[c].iter().map(move |&n| (c, n)))
                    .enumerate()
                    .map(|(i, key)| (key, i))
                    .collect()
            })
            .collect();
        let dims: Vec<usize> = bases.iter().map(|b| b.len()).collect();
        let mut coboundaries = Vec::new();
        for k in 0..top {
            let mut columns: Vec<Vec<(usize, i64)>> = vec![Vec::new(); dims[k]];
            for d in self.base.simplices(k + 1) {
                for (j, c) in d.boundary_faces() {
                    let sign = if j % 2 == 0 { 1 } else { -1 };
                    for &n in &self.stalks[d] {
                        let col = bases[k][&(&c, n)];
                        let row = bases[k + 1][&(d, n)];
                        columns[col].push((row, sign));
                    }
                }
            }
            coboundaries.push(ExactMatrix::from_columns(dims[k + 1], columns));
        }
        for k in 1..coboundaries.len() {
            if !coboundaries[k].mul(&coboundaries[k - 1])?.is_zero_in(Field::Rational) {
                return Err(Error::Internal(format!("coboundary squares to nonzero at degree {k}")));
            }
        }
        let ranks: Vec<usize> = coboundaries.iter().map(|m| m.rank(Field::Rational)).collect();
        Ok((0..=top)
            .map(|k| {
                let out = ranks.get(k).copied().unwrap_or(0);
                let inc = if k > 0 { ranks[k - 1] } else { 0 };
                dims[k] - out - inc
            })
            .collect())
    }
}

/// One simplex's local homology dimensions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalHomologyRow {
    pub simplex: Vec<String>,
    pub values: Vec<usize>,
    /// `values[i]` exceeds the mean of column `i`.
    pub above_mean: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub degrees: Vec<usize>,
    pub rows: Vec<LocalHomologyRow>,
    pub means: Vec<f64>,
}

impl CriticalityReport {
    /// `LH_k` of each vertex, in node order. Panics if `k` was not computed.
    pub fn vertex_values(&self, k: usize) -> Vec<usize> {
        let col = self.degrees.iter().position(|&d| d == k).expect("degree not computed");
        self.rows
            .iter()
            .filter(|r| r.simplex.len() == 1)
            .map(|r| r.values[col])
            .collect()
    }
}

/// `LH_k` for every vertex and edge of `x`.
pub fn criticality_of_complex(x: &SimplicialComplex, ks: &[usize]) -> Result<CriticalityReport> {
    let top = ks.iter().copied().max().unwrap_or(0) + 1;
    let targets: Vec<&Simplex> = x.simplices(0).iter().chain(x.simplices(1)).collect();
    let values = targets
        .par_iter()
        .map(|c| {
            let roi = region_of_influence(x, c)?;
            let profile = local_homology_profile(x, &roi, top);
            Ok(ks.iter().map(|&k| profile.get(k)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<Vec<usize>>>>()?;
    let means: Vec<f64> = (0..ks.len())
        .map(|i| {
            if values.is_empty() {
                0.0
            } else {
                values.iter().map(|v| v[i] as f64).sum::<f64>() / values.len() as f64
            }
        })
        .collect();
    let rows = targets
        .iter()
        .zip(values)
        .map(|(c, v)| LocalHomologyRow {
            simplex: x.label_simplex(c),
            above_mean: v.iter().zip(&means).map(|(&a, &m)| a as f64 > m).collect(),
            values: v,
        })
        .collect();
    Ok(CriticalityReport {
        degrees: ks.to_vec(),
        rows,
        means,
    })
}

pub fn criticality_report(
    w: &WirelessNetwork,
    ks: &[usize],
    kind: ComplexKind,
) -> Result<CriticalityReport> {
    // edges need their cofaces one dimension up to get the full region
    let top = (ks.iter().copied().max().unwrap_or(0) + 1).max(2);
    let x = w.complex(kind, Some(top))?;
    criticality_of_complex(&x, ks)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrafficReport {
    /// Packets each node forwarded as an intermediate hop, in node order.
    pub forwards: Vec<u64>,
    pub delivered: u64,
    pub dropped: u64,
}

/// Routes `packets` random (source, destination) pairs over shortest paths
/// in the link graph, breaking ties toward the smallest next-hop index.
pub fn traffic_sim(w: &WirelessNetwork, packets: u64, seed: u64) -> TrafficReport {
    let n = w.len();
    let adj = w.adjacency();
    let mut report = TrafficReport {
        forwards: vec![0; n],
        delivered: 0,
        dropped: 0,
    };
    if n < 2 {
        report.dropped = packets;
        return report;
    }
    // hop distances to each destination
    let dist: Vec<Vec<Option<u32>>> = (0..n)
        .map(|dst| {
            let mut d = vec![None; n];
            d[dst] = Some(0);
            let mut queue = VecDeque::from([dst]);
            while let Some(u) = queue.pop_front() {
                let du = d[u].unwrap();
                for &v in &adj[u] {
                    if d[v].is_none() {
                        d[v] = Some(du + 1);
                        queue.push_back(v);
                    }
                }
            }
            d
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..packets {
        let src = rng.random_range(0..n);
        let mut dst = rng.random_range(0..n - 1);
        if dst >= src {
            dst += 1;
        }
        let to_dst = &dist[dst];
        let Some(mut remaining) = to_dst[src] else {
            report.dropped += 1;
            continue;
        };
        let mut cur = src;
        while remaining > 1 {
            let next = adj[cur]
                .iter()
                .copied()
                .find(|&v| to_dst[v] == Some(remaining - 1))
                .expect("BFS distances are consistent");
            report.forwards[next] += 1;
            cur = next;
            remaining -= 1;
        }
        report.delivered += 1;
    }
    report
}
