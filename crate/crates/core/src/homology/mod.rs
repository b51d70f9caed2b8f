//! Reduced integral homology, sphericity and Cohen–Macaulay verdicts.

pub mod snf;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use snf::{invariants, SparseMatrix};

pub const DEFAULT_MAX_CELLS: usize = 200_000;

/// Augmented chain complex: bases in every dimension `-1..=dim`, with `∂_0` the augmentation.
#[derive(Clone, Debug)]
pub struct ChainComplex {
    /// `bases[k+1]` is the ordered basis in dimension `k`.
    pub bases: Vec<Vec<Simplex>>,
    /// `boundaries[k+1]` is `∂_k : C_k → C_{k-1}` (empty for `k = -1`).
    pub boundaries: Vec<SparseMatrix>,
}

impl ChainComplex {
    pub fn new(x: &SimplicialComplex) -> Self {
        let top = x.dim();
        let mut bases: Vec<Vec<Simplex>> = Vec::new();
        for k in -1..=top {
            bases.push(x.simplices_of_dim(k).cloned().collect());
        }
        let mut boundaries = vec![SparseMatrix::new(0, bases.first().map_or(0, |b| b.len()))];
        for k in 0..=top {
            let lower = &bases[k as usize];
            let index: HashMap<&Simplex, usize> = lower.iter().enumerate().map(|(i, s)| (s, i)).collect();
            let upper = &bases[k as usize + 1];
            let mut m = SparseMatrix::new(lower.len(), upper.len());
            for (j, s) in upper.iter().enumerate() {
                for (pos, v) in s.vertices().iter().enumerate() {
                    let face = s.without(*v);
                    let sign = if pos % 2 == 0 { 1 } else { -1 };
                    m.cols[j].insert(index[&face], sign);
                }
            }
            boundaries.push(m);
        }
        ChainComplex { bases, boundaries }
    }

    pub fn cells(&self) -> usize {
        self.bases.iter().map(|b| b.len()).sum()
    }

    /// `∂_{k-1} ∘ ∂_k = 0`, checked exactly.
    pub fn boundary_squared_vanishes(&self) -> bool {
        for k in 1..self.boundaries.len() {
            if k + 1 >= self.boundaries.len() {
                break;
            }
            let outer = &self.boundaries[k];
            let inner = &self.boundaries[k + 1];
            for col in &inner.cols {
                let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
                for (mid, c) in col {
                    for (row, d) in &outer.cols[*mid] {
                        *acc.entry(*row).or_default() += c * d;
                    }
                }
                if acc.values().any(|x| *x != 0) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimHomology {
    pub dim: isize,
    pub betti: usize,
    pub torsion: Vec<u64>,
}

/// Reduced homology in dimensions `-1..=dim X`. The void complex has an empty profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyProfile {
    pub complex_dim: isize,
    pub f_vector: Vec<usize>,
    pub groups: Vec<DimHomology>,
}

impl HomologyProfile {
    pub fn betti(&self, k: isize) -> usize {
        self.group(k).map_or(0, |g| g.betti)
    }

    pub fn torsion(&self, k: isize) -> &[u64] {
        self.group(k).map_or(&[], |g| g.torsion.as_slice())
    }

    fn group(&self, k: isize) -> Option<&DimHomology> {
        self.groups.iter().find(|g| g.dim == k)
    }

    pub fn betti_vector(&self) -> Vec<usize> {
        self.groups.iter().filter(|g| g.dim >= 0).map(|g| g.betti).collect()
    }

    pub fn is_acyclic(&self) -> bool {
        self.groups.iter().all(|g| g.betti == 0 && g.torsion.is_empty())
    }

    pub fn is_torsion_free(&self) -> bool {
        self.groups.iter().all(|g| g.torsion.is_empty())
    }

    /// Reduced Euler characteristic from cells (including the empty simplex) and from Betti
    /// numbers; they must agree.
    pub fn euler_consistent(&self) -> bool {
        if self.groups.is_empty() {
            return true;
        }
        let sign = |k: isize| if k.rem_euclid(2) == 0 { 1i64 } else { -1 };
        let from_cells: i64 = -1 + self
            .f_vector
            .iter()
            .enumerate()
            .map(|(k, f)| sign(k as isize) * *f as i64)
            .sum::<i64>();
        let from_betti: i64 = self.groups.iter().map(|g| sign(g.dim) * g.betti as i64).sum();
        from_cells == from_betti
    }

    /// `dim = n`, vanishing below `n`, torsion-free in degree `n`.
    pub fn is_spherical(&self, n: isize) -> bool {
        if self.groups.is_empty() {
            return false;
        }
        self.complex_dim == n
            && self
                .groups
                .iter()
                .all(|g| if g.dim < n { g.betti == 0 && g.torsion.is_empty() } else { g.torsion.is_empty() })
    }

    pub fn top_betti(&self) -> usize {
        self.betti(self.complex_dim)
    }
}

pub fn reduced_homology(x: &SimplicialComplex) -> Result<HomologyProfile> {
    reduced_homology_bounded(x, DEFAULT_MAX_CELLS)
}

pub fn reduced_homology_bounded(x: &SimplicialComplex, max_cells: usize) -> Result<HomologyProfile> {
    if x.is_void() {
        return Ok(HomologyProfile {
            complex_dim: -1,
            f_vector: Vec::new(),
            groups: Vec::new(),
        });
    }
    let cells = x.num_simplices();
    if cells > max_cells {
        return Err(Error::SizeBound {
            what: "cells",
            actual: cells,
            bound: max_cells,
        });
    }
    let cc = ChainComplex::new(x);
    let inv: Vec<snf::Invariants> = cc.boundaries.iter().map(invariants).collect();
    let top = x.dim();
    let mut groups = Vec::new();
    for k in -1..=top {
        let idx = (k + 1) as usize;
        let f = cc.bases[idx].len();
        let rank_out = inv[idx].rank;
        let (rank_in, torsion) = match inv.get(idx + 1) {
            Some(i) => (i.rank, i.torsion()),
            None => (0, Vec::new()),
        };
        groups.push(DimHomology {
            dim: k,
            betti: f - rank_out - rank_in,
            torsion,
        });
    }
    Ok(HomologyProfile {
        complex_dim: top,
        f_vector: x.f_vector(),
        groups,
    })
}

/// Homology-level surrogate for "n-dimensional and (n−1)-connected". For `n = −1` this
/// accepts exactly the complex `{∅}`.
pub fn is_homology_spherical(x: &SimplicialComplex, n: isize) -> Result<bool> {
    if n == -1 {
        return Ok(x.is_empty_complex());
    }
    Ok(reduced_homology(x)?.is_spherical(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkFailure {
    pub simplex: Simplex,
    pub expected_dim: isize,
    pub profile: HomologyProfile,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CmReport {
    pub complex_dim: isize,
    pub links_checked: usize,
    pub failures: Vec<LinkFailure>,
}

impl CmReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that `lk σ` is `(dim X − dim σ − 1)`-homology-spherical for every simplex σ,
/// the empty simplex included.
pub fn homotopy_cm(x: &SimplicialComplex, max_cells: usize) -> Result<CmReport> {
    if x.is_void() {
        return Ok(CmReport {
            complex_dim: -1,
            links_checked: 0,
            failures: vec![LinkFailure {
                simplex: Simplex::empty(),
                expected_dim: -1,
                profile: reduced_homology(x)?,
            }],
        });
    }
    let d = x.dim();
    let results: Vec<Result<Option<LinkFailure>>> = x
        .simplices()
        .par_iter()
        .map(|s| {
            let lk = x.link(s)?;
            let expected = d - s.dim() - 1;
            let ok = if expected == -1 {
                lk.is_empty_complex()
            } else {
                let p = reduced_homology_bounded(&lk, max_cells)?;
                if p.is_spherical(expected) {
                    return Ok(None);
                }
                return Ok(Some(LinkFailure {
                    simplex: s.clone(),
                    expected_dim: expected,
                    profile: p,
                }));
            };
            if ok {
                Ok(None)
            } else {
                Ok(Some(LinkFailure {
                    simplex: s.clone(),
                    expected_dim: expected,
                    profile: reduced_homology_bounded(&lk, max_cells)?,
                }))
            }
        })
        .collect();
    let mut failures = Vec::new();
    for r in results {
        if let Some(f) = r? {
            failures.push(f);
        }
    }
    Ok(CmReport {
        complex_dim: d,
        links_checked: x.num_simplices(),
        failures,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pi1Status {
    Trivial,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectivityVerdict {
    pub dim: isize,
    pub homology_spherical: bool,
    pub noncontractible: bool,
    pub homotopy_cm: bool,
    pub pi1: Option<Pi1Status>,
}

impl ConnectivityVerdict {
    pub fn from_parts(profile: &HomologyProfile, cm: &CmReport, pi1: Option<Pi1Status>) -> Self {
        ConnectivityVerdict {
            dim: profile.complex_dim,
            homology_spherical: !profile.groups.is_empty() && profile.is_spherical(profile.complex_dim),
            noncontractible: !profile.is_acyclic(),
            homotopy_cm: cm.passed(),
            pi1,
        }
    }
}

/// Edge-path presentation from a spanning tree, relations from triangles, then bounded
/// Tietze elimination. `Trivial` only when every generator is eliminated.
pub fn pi1_trivial(x: &SimplicialComplex) -> Pi1Status {
    if x.components() != 1 {
        return Pi1Status::Unknown;
    }
    let verts: Vec<_> = x.vertex_ids().collect();
    let edges: Vec<Simplex> = x.simplices_of_dim(1).cloned().collect();
    // BFS spanning tree
    let mut adj: HashMap<u32, Vec<u32>> = HashMap::new();
    for e in &edges {
        let (a, b) = (e.vertices()[0], e.vertices()[1]);
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut tree = std::collections::HashSet::new();
    let mut seen = std::collections::HashSet::from([verts[0]]);
    let mut queue = std::collections::VecDeque::from([verts[0]]);
    while let Some(v) = queue.pop_front() {
        for w in adj.get(&v).into_iter().flatten() {
            if seen.insert(*w) {
                tree.insert(Simplex::new([v, *w]));
                queue.push_back(*w);
            }
        }
    }
    let mut gen_of: HashMap<Simplex, i32> = HashMap::new();
    for e in &edges {
        if !tree.contains(e) {
            let id = gen_of.len() as i32 + 1;
            gen_of.insert(e.clone(), id);
        }
    }
    if gen_of.is_empty() {
        return Pi1Status::Trivial;
    }
    let letter = |a: u32, b: u32| -> Option<i32> {
        let e = Simplex::new([a, b]);
        gen_of.get(&e).map(|g| if a < b { *g } else { -*g })
    };
    let mut relations: Vec<Vec<i32>> = x
        .simplices_of_dim(2)
        .map(|t| {
            let v = t.vertices();
            [letter(v[0], v[1]), letter(v[1], v[2]), letter(v[2], v[0])]
                .into_iter()
                .flatten()
                .collect()
        })
        .collect();
    let mut alive: std::collections::BTreeSet<i32> = gen_of.values().copied().collect();
    const MAX_LEN: usize = 4096;
    let mut progress = true;
    while progress && !alive.is_empty() {
        progress = false;
        for r in relations.iter_mut() {
            *r = cyclic_reduce(free_reduce(std::mem::take(r)));
        }
        relations.retain(|r| !r.is_empty());
        // a relator containing some generator exactly once eliminates it
        let mut pick = None;
        'outer: for (ri, r) in relations.iter().enumerate() {
            let mut counts: BTreeMap<i32, usize> = BTreeMap::new();
            for l in r {
                *counts.entry(l.abs()).or_default() += 1;
            }
            for (g, c) in counts {
                if c == 1 {
                    pick = Some((ri, g));
                    break 'outer;
                }
            }
        }
        if let Some((ri, g)) = pick {
            let r = relations.remove(ri);
            let pos = r.iter().position(|l| l.abs() == g).expect("generator occurs");
            // r = A g^ε B = 1  ⇒  g^ε = A⁻¹ B⁻¹ , as a cyclic word: g^ε = (B A)⁻¹
            let mut rest: Vec<i32> = r[pos + 1..].iter().chain(r[..pos].iter()).copied().collect();
            rest.reverse();
            for l in rest.iter_mut() {
                *l = -*l;
            }
            let eps = r[pos].signum();
            let value = if eps > 0 {
                rest
            } else {
                let mut inv = rest;
                inv.reverse();
                inv.iter_mut().for_each(|l| *l = -*l);
                inv
            };
            let mut inverse = value.clone();
            inverse.reverse();
            inverse.iter_mut().for_each(|l| *l = -*l);
            let mut too_long = false;
            for other in relations.iter_mut() {
                let mut out = Vec::with_capacity(other.len());
                for l in other.iter() {
                    if *l == g {
                        out.extend_from_slice(&value);
                    } else if *l == -g {
                        out.extend_from_slice(&inverse);
                    } else {
                        out.push(*l);
                    }
                }
                too_long |= out.len() > MAX_LEN;
                *other = out;
            }
            alive.remove(&g);
            progress = !too_long;
        }
    }
    if alive.is_empty() {
        Pi1Status::Trivial
    } else {
        Pi1Status::Unknown
    }
}

fn free_reduce(word: Vec<i32>) -> Vec<i32> {
    let mut out: Vec<i32> = Vec::with_capacity(word.len());
    for l in word {
        if out.last() == Some(&-l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

fn cyclic_reduce(mut w: Vec<i32>) -> Vec<i32> {
    while w.len() >= 2 && w[0] == -w[w.len() - 1] {
        w.pop();
        w.remove(0);
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::{hexagon, plain};

    #[test]
    fn circles_and_points() {
        let h = reduced_homology(&hexagon()).unwrap();
        assert_eq!(h.betti_vector(), vec![0, 1]);
        assert!(h.euler_consistent());
        let sq = plain(4, &[&[0, 2], &[2, 1], &[1, 3], &[3, 0]]);
        assert_eq!(reduced_homology(&sq).unwrap().betti_vector(), vec![0, 1]);
        let pt = plain(1, &[&[0]]);
        assert!(reduced_homology(&pt).unwrap().is_acyclic());
        let two = plain(2, &[&[0], &[1]]);
        assert_eq!(reduced_homology(&two).unwrap().betti_vector(), vec![1]);
    }

    #[test]
    fn empty_complex_is_minus_one_sphere() {
        let e = SimplicialComplex::empty(Default::default());
        let p = reduced_homology(&e).unwrap();
        assert_eq!(p.betti(-1), 1);
        assert!(is_homology_spherical(&e, -1).unwrap());
        assert!(!is_homology_spherical(&hexagon(), -1).unwrap());
        assert!(is_homology_spherical(&hexagon(), 1).unwrap());
    }

    #[test]
    fn boundary_squares_to_zero() {
        let tet = plain(4, &[&[0, 1, 2, 3]]);
        assert!(ChainComplex::new(&tet).boundary_squared_vanishes());
        let bd = tet.skeleton(2);
        let p = reduced_homology(&bd).unwrap();
        assert_eq!(p.betti_vector(), vec![0, 0, 1]);
        assert!(reduced_homology(&tet).unwrap().is_acyclic());
    }

    #[test]
    fn real_projective_plane_has_torsion() {
        // 6-vertex RP²
        let rp2 = plain(
            6,
            &[
                &[0, 1, 2], &[0, 2, 3], &[0, 3, 4], &[0, 4, 5], &[0, 5, 1],
                &[1, 2, 4], &[2, 3, 5], &[3, 4, 1], &[4, 5, 2], &[5, 1, 3],
            ],
        );
        let p = reduced_homology(&rp2).unwrap();
        assert_eq!(p.torsion(1), &[2]);
        assert_eq!(p.betti_vector(), vec![0, 0, 0]);
        assert!(!p.is_spherical(2));
        assert!(p.euler_consistent());
    }

    #[test]
    fn cm_examples() {
        assert!(homotopy_cm(&hexagon(), 1000).unwrap().passed());
        let tri = plain(3, &[&[0, 1, 2]]);
        // a closed simplex is contractible, hence spherical with all links simplices
        assert!(homotopy_cm(&tri, 1000).unwrap().passed());
        // two triangles sharing a vertex: the link of that vertex is disconnected edges
        let bow = plain(5, &[&[0, 1, 2], &[0, 3, 4]]);
        assert!(!homotopy_cm(&bow, 1000).unwrap().passed());
    }

    #[test]
    fn cone_is_acyclic() {
        let cone = plain(7, &[&[6, 0, 1], &[6, 1, 2], &[6, 2, 3], &[6, 3, 4], &[6, 4, 5], &[6, 5, 0]]);
        assert!(reduced_homology(&cone).unwrap().is_acyclic());
    }

    #[test]
    fn size_bound() {
        let tet = plain(4, &[&[0, 1, 2, 3]]);
        assert!(reduced_homology_bounded(&tet, 3).unwrap_err().is_size_bound());
    }

    #[test]
    fn pi1_examples() {
        let tet = plain(4, &[&[0, 1, 2, 3]]);
        assert_eq!(pi1_trivial(&tet.skeleton(2)), Pi1Status::Trivial);
        assert_eq!(pi1_trivial(&hexagon()), Pi1Status::Unknown);
        let rp2 = plain(
            6,
            &[
                &[0, 1, 2], &[0, 2, 3], &[0, 3, 4], &[0, 4, 5], &[0, 5, 1],
                &[1, 2, 4], &[2, 3, 5], &[3, 4, 1], &[4, 5, 2], &[5, 1, 3],
            ],
        );
        assert_eq!(pi1_trivial(&rp2), Pi1Status::Unknown);
    }

    #[test]
    fn word_reduction() {
        assert_eq!(free_reduce(vec![1, 2, -2, -1, 3]), vec![3]);
        assert_eq!(cyclic_reduce(vec![1, 3, -1]), vec![3]);
    }
}
