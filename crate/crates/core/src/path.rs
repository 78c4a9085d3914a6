//! Non-regular path homology of loopless digraphs.
//!
//! Allowed p-paths are directed walks on p+1 vertices. The space `Ω_p` holds
//! the allowed p-chains whose boundary (vertex deletion with alternating
//! signs) lands back on allowed (p−1)-paths; its homology generalises the
//! cyclomatic number of a control-flow graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::homology::BettiProfile;
use crate::linalg::{ExactMatrix, Field};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Digraph {
    labels: Vec<String>,
    arcs: BTreeSet<(usize, usize)>,
    out: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds from vertex labels and arcs between label indices. Repeated
    /// arcs collapse; self-loops are rejected.
    pub fn new(labels: Vec<String>, arcs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = labels.len();
        let mut set = BTreeSet::new();
        for (u, v) in arcs {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("arc ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at {:?}", labels[u])));
            }
            set.insert((u, v));
        }
        let mut out = vec![Vec::new(); n];
        for &(u, v) in &set {
            out[u].push(v);
        }
        Ok(Digraph {
            labels,
            arcs: set,
            out,
        })
    }

    /// Builds from labelled arcs and optional isolated vertices. Vertex ids
    /// follow natural label order (numeric when every label is an integer).
    pub fn from_labeled<S: AsRef<str>>(vertices: &[S], arcs: &[(S, S)]) -> Result<Self> {
        let mut labels: Vec<String> = vertices
            .iter()
            .map(|s| s.as_ref().to_string())
            .chain(arcs.iter().flat_map(|(a, b)| [a.as_ref().to_string(), b.as_ref().to_string()]))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if labels.iter().all(|l| l.parse::<i64>().is_ok()) {
            labels.sort_by_key(|l| l.parse::<i64>().unwrap());
        }
        let ids: HashMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
        let arcs: Vec<(usize, usize)> = arcs
            .iter()
            .map(|(a, b)| (ids[a.as_ref()], ids[b.as_ref()]))
            .collect();
        let labels_owned = labels.clone();
        Digraph::new(labels_owned, arcs)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.arcs.iter().copied()
    }

    pub fn has_arc(&self, u: usize, v: usize) -> bool {
        self.arcs.contains(&(u, v))
    }

    pub fn vertex_id(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Weakly connected components.
    pub fn components(&self) -> usize {
        let n = self.labels.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut x = x;
            while p[x] != r {
                let nx = p[x];
                p[x] = r;
                x = nx;
            }
            r
        }
        let mut count = n;
        for &(u, v) in &self.arcs {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a] = b;
                count -= 1;
            }
        }
        count
    }

    /// The same digraph with vertices renamed by `perm[old] = new`.
    pub fn relabeled(&self, perm: &[usize]) -> Digraph {
        let mut labels = vec![String::new(); self.labels.len()];
        for (old, &new) in perm.iter().enumerate() {
            labels[new] = self.labels[old].clone();
        }
        Digraph::new(labels, self.arcs.iter().map(|&(u, v)| (perm[u], perm[v]))).unwrap()
    }
}

/// Allowed p-paths in lexicographic order; `𝒜_0` is the vertex list.
pub fn allowed_paths(d: &Digraph, p: usize) -> Vec<Vec<usize>> {
    let mut paths: Vec<Vec<usize>> = (0..d.vertex_count()).map(|v| vec![v]).collect();
    for _ in 0..p {
        paths = paths
            .iter()
            .flat_map(|path| {
                let last = *path.last().unwrap();
                d.out[last].iter().map(move |&v| {
                    let mut q = path.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    paths
}

/// The non-regular boundary of a single path, split by whether each face is
/// allowed. Faces are `(path with entry j deleted, (−1)^j)`.
fn boundary_terms(path: &[usize]) -> Vec<(Vec<usize>, i64)> {
    (0..path.len())
        .map(|j| {
            let mut face = path.to_vec();
            face.remove(j);
            (face, if j % 2 == 0 { 1 } else { -1 })
        })
        .collect()
}

fn is_allowed(d: &Digraph, path: &[usize]) -> bool {
    path.windows(2).all(|w| d.has_arc(w[0], w[1]))
}

/// The boundary of allowed p-paths, whole and restricted to the rows of
/// non-allowed tuples.
struct SplitBoundary {
    constraint: ExactMatrix,
    full: ExactMatrix,
}

fn split_boundary(d: &Digraph, allowed: &[Vec<usize>], below: &[Vec<usize>]) -> SplitBoundary {
    let below_index: HashMap<&[usize], usize> =
        below.iter().enumerate().map(|(i, p)| (p.as_slice(), i)).collect();
    let mut bad_index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut allowed_cols = Vec::with_capacity(allowed.len());
    let mut bad_cols = Vec::with_capacity(allowed.len());
    for path in allowed {
        let mut a = Vec::new();
        let mut b = Vec::new();
        if path.len() > 1 {
            for (face, sign) in boundary_terms(path) {
                if let Some(&i) = below_index.get(face.as_slice()) {
                    a.push((i, sign));
                } else {
                    debug_assert!(!is_allowed(d, &face));
                    let next = bad_index.len();
                    let i = *bad_index.entry(face).or_insert(next);
                    b.push((i, sign));
                }
            }
        }
        allowed_cols.push(a);
        bad_cols.push(b);
    }
    let nb = bad_index.len();
    let full_cols = allowed_cols
        .iter()
        .zip(&bad_cols)
        .map(|(a, b)| {
            a.iter()
                .copied()
                .chain(b.iter().map(|&(i, s)| (below.len() + i, s)))
                .collect()
        })
        .collect();
    SplitBoundary {
        constraint: ExactMatrix::from_columns(nb, bad_cols),
        full: ExactMatrix::from_columns(below.len() + nb, full_cols),
    }
}

/// `Ω_p` as a span inside allowed-path coordinates.
#[derive(Clone, Debug)]
pub struct PathBasis {
    pub degree: usize,
    pub allowed: Vec<Vec<usize>>,
    /// Columns span `Ω_p`, one row per allowed path.
    pub omega_basis: ExactMatrix,
}

impl PathBasis {
    pub fn dim(&self) -> usize {
        self.omega_basis.cols()
    }
}

pub fn omega(d: &Digraph, p: usize) -> Result<PathBasis> {
    let allowed = allowed_paths(d, p);
    let omega_basis = if p == 0 {
        let n = allowed.len();
        ExactMatrix::from_columns(n, (0..n).map(|i| vec![(i, 1)]).collect())
    } else {
        let below = allowed_paths(d, p - 1);
        split_boundary(d, &allowed, &below).constraint.kernel(Field::Rational)?
    };
    Ok(PathBasis {
        degree: p,
        allowed,
        omega_basis,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathHomology {
    pub degrees: Vec<usize>,
    pub allowed_counts: Vec<usize>,
    /// `dim Ω_p` for `p = 0..=max_p + 1`.
    pub omega_dims: Vec<usize>,
    /// `rank ∂_p|Ω_p` for `p = 0..=max_p + 1`.
    pub ranks: Vec<usize>,
    pub betti: BettiProfile,
}

/// Path homology in degrees `0..=max_p` over the rationals.
pub fn path_homology(d: &Digraph, max_p: usize) -> PathHomology {
    let mut omega_dims = Vec::new();
    let mut ranks = Vec::new();
    let mut allowed_counts = Vec::new();
    let mut below = allowed_paths(d, 0);
    allowed_counts.push(below.len());
    omega_dims.push(below.len());
    ranks.push(0);
    for p in 1..=max_p + 1 {
        let allowed = allowed_paths(d, p);
        let split = split_boundary(d, &allowed, &below);
        let rc = split.constraint.rank(Field::Rational);
        let rf = split.full.rank(Field::Rational);
        allowed_counts.push(allowed.len());
        omega_dims.push(allowed.len() - rc);
        ranks.push(rf - rc);
        below = allowed;
    }
    let betti = BettiProfile::from_ranks(&omega_dims, &ranks, max_p + 1);
    PathHomology {
        degrees: (0..=max_p).collect(),
        allowed_counts,
        omega_dims,
        ranks,
        betti,
    }
}

/// Betti numbers, reduced (`β̃_p = β_p − δ_{p0}`) when asked.
pub fn path_betti(d: &Digraph, max_p: usize, reduced: bool) -> Vec<i64> {
    let h = path_homology(d, max_p);
    if reduced {
        h.betti.reduced
    } else {
        h.betti.betti.iter().map(|&b| b as i64).collect()
    }
}

/// `E − V + C`, the first Betti number of the underlying undirected graph.
/// Antiparallel arcs count as two edges.
pub fn cyclomatic(d: &Digraph) -> i64 {
    d.arc_count() as i64 - d.vertex_count() as i64 + d.components() as i64
}

/// Checks that every `Ω_p` basis vector (p ≤ max_p) has its boundary on
/// allowed paths and that `∂∂ω = 0`.
pub fn verify_omega_complex(d: &Digraph, max_p: usize) -> Result<()> {
    for p in 1..=max_p {
        let basis = omega(d, p)?;
        for c in 0..basis.omega_basis.cols() {
            let mut first: HashMap<Vec<usize>, i64> = HashMap::new();
            for &(i, coef) in basis.omega_basis.column(c) {
                for (face, s) in boundary_terms(&basis.allowed[i]) {
                    *first.entry(face).or_insert(0) += coef * s;
                }
            }
            first.retain(|_, v| *v != 0);
            if let Some(bad) = first.keys().find(|f| !is_allowed(d, f)) {
                return Err(Error::Internal(format!(
                    "Ω_{p} vector has boundary on non-allowed tuple {bad:?}"
                )));
            }
            let mut second: HashMap<Vec<usize>, i64> = HashMap::new();
            for (face, coef) in &first {
                if face.len() > 1 {
                    for (f2, s) in boundary_terms(face) {
                        *second.entry(f2).or_insert(0) += coef * s;
                    }
                }
            }
            if second.values().any(|&v| v != 0) {
                return Err(Error::Internal(format!("∂∂ ≠ 0 on Ω_{p}")));
            }
        }
    }
    Ok(())
}
