//! Simplicial chain complexes, Betti numbers and relative/local homology.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
pub use crate::linalg::{ExactMatrix, Field};
use crate::wireless::region_of_influence;

/// Chain groups `C_0..=C_P` with boundary maps `∂_1..=∂_P`.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    pub field: Field,
    /// `boundaries[p - 1]` is `∂_p : C_p -> C_{p-1}`.
    pub boundaries: Vec<ExactMatrix>,
    pub dims: Vec<usize>,
    /// Basis of each `C_p` as ascending vertex tuples.
    pub basis: Vec<Vec<Simplex>>,
    /// Set when the source complex has simplices above the top degree, in
    /// which case homology in the top degree is not determined.
    pub truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BettiProfile {
    pub betti: Vec<usize>,
    /// `β̃_p = β_p − δ_{p0}`; all zero for an empty complex.
    pub reduced: Vec<i64>,
    pub euler: i64,
    /// `dim Z_p = dim C_p − rank ∂_p`.
    pub cycles: Vec<usize>,
    /// `dim B_p = rank ∂_{p+1}`.
    pub boundaries: Vec<usize>,
}

impl BettiProfile {
    pub(crate) fn from_ranks(dims: &[usize], ranks: &[usize], degrees: usize) -> Self {
        // ranks[p] = rank ∂_p with ranks[0] = 0; missing entries are zero.
        let rank = |p: usize| ranks.get(p).copied().unwrap_or(0);
        let cycles: Vec<usize> = (0..degrees).map(|p| dims[p] - rank(p)).collect();
        let boundaries: Vec<usize> = (0..degrees).map(|p| rank(p + 1)).collect();
        let betti: Vec<usize> = (0..degrees).map(|p| cycles[p] - boundaries[p]).collect();
        let nonempty = dims.first().is_some_and(|&d| d > 0);
        let reduced = betti
            .iter()
            .enumerate()
            .map(|(p, &b)| {
                if p == 0 && nonempty {
                    b as i64 - 1
                } else {
                    b as i64
                }
            })
            .collect();
        let euler = betti
            .iter()
            .enumerate()
            .map(|(p, &b)| if p % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum();
        BettiProfile {
            betti,
            reduced,
            euler,
            cycles,
            boundaries,
        }
    }

    pub fn get(&self, p: usize) -> usize {
        self.betti.get(p).copied().unwrap_or(0)
    }
}

impl ChainComplex {
    /// Builds boundary matrices for a graded basis. Faces absent from the
    /// basis one degree down are dropped, which realises the relative
    /// boundary when the basis omits a closed subcomplex.
    fn from_basis(basis: Vec<Vec<Simplex>>, field: Field, truncated: bool) -> Self {
        let positions: Vec<HashMap<&Simplex, usize>> = basis
            .iter()
            .map(|layer| layer.iter().enumerate().map(|(i, s)| (s, i)).collect())
            .collect();
        let mut boundaries = Vec::new();
        for p in 1..basis.len() {
            let columns = basis[p]
                .iter()
                .map(|s| {
                    s.boundary_faces()
                        .filter_map(|(j, f)| {
                            positions[p - 1]
                                .get(&f)
                                .map(|&row| (row, if j % 2 == 0 { 1 } else { -1 }))
                        })
                        .collect()
                })
                .collect();
            boundaries.push(ExactMatrix::from_columns(basis[p - 1].len(), columns));
        }
        let dims = basis.iter().map(|l| l.len()).collect();
        ChainComplex {
            field,
            boundaries,
            dims,
            basis,
            truncated,
        }
    }

    /// `∂_p`, or `None` outside `1..=P`.
    pub fn boundary(&self, p: usize) -> Option<&ExactMatrix> {
        p.checked_sub(1).and_then(|i| self.boundaries.get(i))
    }

    pub fn top_degree(&self) -> Option<usize> {
        self.dims.len().checked_sub(1)
    }

    /// Checks `∂_{p−1} ∘ ∂_p = 0` in the complex's field.
    pub fn verify(&self) -> Result<()> {
        for p in 2..=self.boundaries.len() {
            let prod = self.boundaries[p - 2].mul(&self.boundaries[p - 1])?;
            if !prod.is_zero_in(self.field) {
                return Err(Error::Internal(format!("boundary of boundary nonzero at degree {p}")));
            }
        }
        Ok(())
    }

    /// `rank ∂_p` for `p = 0..=P` (with `rank ∂_0 = 0`).
    pub fn ranks(&self) -> Vec<usize> {
        std::iter::once(0)
            .chain(self.boundaries.iter().map(|b| b.rank(self.field)))
            .collect()
    }

    pub fn betti(&self) -> BettiProfile {
        let degrees = if self.truncated {
            self.dims.len().saturating_sub(1)
        } else {
            self.dims.len()
        };
        BettiProfile::from_ranks(&self.dims, &self.ranks(), degrees)
    }

    /// `Σ (−1)^p dim C_p`.
    pub fn euler_from_dims(&self) -> i64 {
        self.dims
            .iter()
            .enumerate()
            .map(|(p, &d)| if p % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

/// Simplicial chain complex of `k` in degrees `0..=max_dim` (or the complex's
/// dimension if smaller), lexicographic bases.
pub fn simplicial_chain_complex(
    k: &SimplicialComplex,
    field: Field,
    max_dim: Option<usize>,
) -> ChainComplex {
    let top = match (k.dim(), max_dim) {
        (None, _) => return ChainComplex::from_basis(Vec::new(), field, false),
        (Some(d), None) => d,
        (Some(d), Some(m)) => d.min(m),
    };
    let basis = (0..=top).map(|p| k.simplices(p).to_vec()).collect();
    let truncated = k.dim().is_some_and(|d| d > top);
    ChainComplex::from_basis(basis, field, truncated)
}

/// Betti numbers of the whole complex.
pub fn betti(k: &SimplicialComplex, field: Field) -> BettiProfile {
    simplicial_chain_complex(k, field, None).betti()
}

/// Chains of `x` modulo a closed subcomplex `y`, given as simplices in the
/// vertex ids of `x`.
pub fn relative_chain_complex_of_set(
    x: &SimplicialComplex,
    y: &BTreeSet<Simplex>,
    field: Field,
    max_dim: Option<usize>,
) -> Result<ChainComplex> {
    for s in y {
        if !x.contains(s) {
            return Err(Error::invalid(format!("{s} is not a simplex of the ambient complex")));
        }
    }
    if !x.is_closed(y) {
        return Err(Error::invalid("relative subcomplex is not closed"));
    }
    let Some(xdim) = x.dim() else {
        return Ok(ChainComplex::from_basis(Vec::new(), field, false));
    };
    let top = max_dim.map_or(xdim, |m| m.min(xdim));
    let basis = (0..=top)
        .map(|p| x.simplices(p).iter().filter(|s| !y.contains(*s)).cloned().collect())
        .collect();
    Ok(ChainComplex::from_basis(basis, field, xdim > top))
}

/// Relative chain complex `C(X, Y)`; `y` is matched to `x` by vertex label.
pub fn relative_chain_complex(
    x: &SimplicialComplex,
    y: &SimplicialComplex,
    field: Field,
) -> Result<ChainComplex> {
    let mut set = BTreeSet::new();
    for s in y.iter() {
        let labels = y.label_simplex(s);
        set.insert(x.simplex_of(&labels)?);
    }
    relative_chain_complex_of_set(x, &set, field, None)
}

/// `dim H_k(X, X ∖ roi c)` over GF(2).
pub fn local_homology(x: &SimplicialComplex, c: &Simplex, k: usize) -> Result<usize> {
    let roi = region_of_influence(x, c)?;
    Ok(local_homology_profile(x, &roi, k + 1).get(k))
}

/// GF(2) Betti numbers of `(X, X ∖ roi)` in degrees `0..=max_k`, computed
/// on the chains of the region itself.
pub(crate) fn local_homology_profile(
    x: &SimplicialComplex,
    roi: &BTreeSet<Simplex>,
    top: usize,
) -> BettiProfile {
    let xdim = x.dim().unwrap_or(0);
    let top = top.min(xdim);
    let mut basis: Vec<Vec<Simplex>> = vec![Vec::new(); top + 1];
    for s in roi {
        if s.dim() <= top {
            basis[s.dim()].push(s.clone());
        }
    }
    for layer in &mut basis {
        layer.sort();
    }
    let cc = ChainComplex::from_basis(basis, Field::Gf2, xdim > top);
    let degrees = if cc.truncated { top } else { top + 1 };
    BettiProfile::from_ranks(&cc.dims, &cc.ranks(), degrees)
}
