//! The Coxeter complex of type A (and joins of such), realized on the round sphere with
//! integer vertex vectors.
//!
//! For a factor of rank `n` the vertices are the proper nonempty subsets `S` of
//! `{1, …, n+1}` and the vertex vector is `u_S = (n+1)·e_S − |S|·𝟙`. Chambers are maximal
//! chains of subsets. Factors of a reducible type occupy orthogonal coordinate blocks, so
//! points in different factors are at distance π/2. Every comparison of a distance with π/2
//! is the sign of an integer inner product.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, SimplicialComplex, VertexId, VertexInfo, VertexType};
use crate::error::{Error, Result};

/// Bitmask over `{0, …, n}`; bit `i` stands for the 1-based element `i+1`.
pub type Subset = u32;

pub const DEFAULT_RANK_BOUND: usize = 5;

pub fn subset_label(s: Subset) -> String {
    let items: Vec<String> = (0..32)
        .filter(|i| s & (1 << i) != 0)
        .map(|i| (i + 1).to_string())
        .collect();
    format!("{{{}}}", items.join(","))
}

pub fn subset_from_elements(elements: &[usize]) -> Result<Subset> {
    let mut s = 0;
    for &e in elements {
        if e == 0 || e > 31 {
            return Err(Error::input(format!("subset element {e} out of range")));
        }
        s |= 1 << (e - 1);
    }
    Ok(s)
}

fn full_mask(n: usize) -> Subset {
    (1u32 << (n + 1)) - 1
}

/// A permutation of `{0, …, len-1}` stored as its image list.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<usize>);

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one_based: Vec<usize> = self.0.iter().map(|x| x + 1).collect();
        write!(f, "{one_based:?}")
    }
}

impl Permutation {
    pub fn identity(len: usize) -> Self {
        Permutation((0..len).collect())
    }

    /// The order-reversing permutation `w₀`.
    pub fn longest(len: usize) -> Self {
        Permutation((0..len).rev().collect())
    }

    /// The adjacent transposition `s_k` swapping `k-1` and `k` (1-based `k`).
    pub fn simple(len: usize, k: usize) -> Self {
        let mut p = Self::identity(len);
        p.0.swap(k - 1, k);
        p
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Permutation(inv)
    }

    /// `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inversions(&self) -> usize {
        let p = &self.0;
        let mut c = 0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    c += 1;
                }
            }
        }
        c
    }
}

/// Relative position of two complete flags of an `(n+1)`-dimensional space (or of subsets
/// of an `(n+1)`-set), from the table `meet(i, j) = dim(U_i ∩ V_j)` for `i, j ∈ 0..=n+1`
/// with `U_0 = V_0 = 0` and `U_{n+1} = V_{n+1}` the whole space. The result maps `i` to
/// the unique `j` at which the table jumps.
pub fn relative_position(n: usize, meet: impl Fn(usize, usize) -> usize) -> Permutation {
    let m = n + 1;
    let mut table = vec![vec![0usize; m + 1]; m + 1];
    for (i, row) in table.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = match (i, j) {
                (0, _) | (_, 0) => 0,
                _ if i == m => j,
                _ if j == m => i,
                _ => meet(i, j),
            };
        }
    }
    let mut w = vec![usize::MAX; m];
    for i in 1..=m {
        for j in 1..=m {
            let jump = table[i][j] + table[i - 1][j - 1] - table[i - 1][j] - table[i][j - 1];
            if jump == 1 {
                w[i - 1] = j - 1;
            }
        }
    }
    debug_assert!(w.iter().all(|&x| x != usize::MAX), "degenerate dimension table");
    Permutation(w)
}

/// An element of the Weyl group of a (possibly reducible) type-A datum: one permutation
/// per irreducible factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeylElement(pub Vec<Permutation>);

impl WeylElement {
    pub fn identity(ranks: &[usize]) -> Self {
        WeylElement(ranks.iter().map(|&n| Permutation::identity(n + 1)).collect())
    }

    pub fn longest(ranks: &[usize]) -> Self {
        WeylElement(ranks.iter().map(|&n| Permutation::longest(n + 1)).collect())
    }

    pub fn inverse(&self) -> Self {
        WeylElement(self.0.iter().map(Permutation::inverse).collect())
    }

    pub fn length(&self) -> usize {
        self.0.iter().map(Permutation::inversions).sum()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl From<Ordering> for Sign {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Sign::Neg,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Pos,
        }
    }
}

/// The closed half-apartment `{x : x_i − x_j ≥ 0}` inside factor `factor`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Root {
    pub factor: usize,
    pub i: usize,
    pub j: usize,
}

impl Root {
    pub fn opposite(&self) -> Root {
        Root {
            factor: self.factor,
            i: self.j,
            j: self.i,
        }
    }

    /// Vertices of other factors lie on every wall of this factor.
    pub fn contains(&self, (factor, s): (usize, Subset)) -> bool {
        factor != self.factor || s & (1 << self.i) != 0 || s & (1 << self.j) == 0
    }

    pub fn on_wall(&self, (factor, s): (usize, Subset)) -> bool {
        factor != self.factor || ((s >> self.i) & 1) == ((s >> self.j) & 1)
    }
}

/// A point of the realization given by positive rational barycentric weights on a carrier
/// simplex. `coords` is a positive integer multiple of `Σ wᵢ·uᵢ`; only its direction matters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    pub carrier: Simplex,
    pub weights: Vec<Ratio<i64>>,
    pub coords: Vec<i64>,
}

impl RationalPoint {
    pub fn dot(&self, other: &RationalPoint) -> i128 {
        dot(&self.coords, &other.coords)
    }

    pub fn norm2(&self) -> i128 {
        dot(&self.coords, &self.coords)
    }
}

pub fn dot(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(x, y)| *x as i128 * *y as i128).sum()
}

/// Integer vector combination `Σ wᵢ vᵢ` scaled by the lcm of the weight denominators and
/// reduced by the gcd of the entries.
pub fn combine(vectors: &[&[i64]], weights: &[Ratio<i64>]) -> Vec<i64> {
    let dim = vectors.first().map_or(0, |v| v.len());
    let l = weights.iter().fold(1i64, |acc, w| acc.lcm(w.denom()));
    let mut out = vec![0i64; dim];
    for (v, w) in vectors.iter().zip(weights) {
        let scale = w.numer() * (l / w.denom());
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += scale * x;
        }
    }
    let g = out.iter().fold(0i64, |acc, x| acc.gcd(x));
    if g > 1 {
        for o in &mut out {
            *o /= g;
        }
    }
    out
}

/// Exact sign of `cos d(p, q)`.
pub fn cos_sign_vec(p: &[i64], q: &[i64]) -> Sign {
    dot(p, q).cmp(&0).into()
}

/// Exact comparison of `cos d(p, q) = ⟨p,q⟩ / (|p||q|)` with the rational `t`.
pub fn cmp_cos_threshold_vec(p: &[i64], q: &[i64], t: Ratio<i64>) -> Ordering {
    let a = BigInt::from(dot(p, q));
    let n2 = BigInt::from(dot(p, p)) * BigInt::from(dot(q, q));
    // compare a·den with num·sqrt(n2), den > 0
    let lhs = a * BigInt::from(*t.denom());
    let num = BigInt::from(*t.numer());
    let sl = lhs.sign();
    let sr = num.sign();
    use num_bigint::Sign as S;
    let rank = |s: S| match s {
        S::Minus => -1,
        S::NoSign => 0,
        S::Plus => 1,
    };
    if rank(sl) != rank(sr) {
        return rank(sl).cmp(&rank(sr));
    }
    if sl == S::NoSign {
        return Ordering::Equal;
    }
    let l2 = &lhs * &lhs;
    let r2 = &num * &num * n2;
    if sl == S::Plus {
        l2.cmp(&r2)
    } else {
        r2.cmp(&l2)
    }
}

/// `q` is a negative multiple of `p`.
pub fn antipodal_vec(p: &[i64], q: &[i64]) -> bool {
    let pq = dot(p, q);
    if pq >= 0 {
        return false;
    }
    // Cauchy–Schwarz equality ⟨p,q⟩² = |p|²|q|² with negative sign
    let lhs = BigInt::from(pq) * BigInt::from(pq);
    let rhs = BigInt::from(dot(p, p)) * BigInt::from(dot(q, q));
    lhs == rhs
}

/// Floating-point `(d(x,y), d(x,z), ∠_x(y,z))`. Test oracle only.
pub fn angle_oracle(x: &[i64], y: &[i64], z: &[i64]) -> Result<(f64, f64, f64)> {
    let f = |v: &[i64]| -> Vec<f64> {
        let n = (dot(v, v) as f64).sqrt();
        v.iter().map(|c| *c as f64 / n).collect()
    };
    let (xh, yh, zh) = (f(x), f(y), f(z));
    let fd = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();
    for (name, v) in [("y", y), ("z", z)] {
        if antipodal_vec(x, v) {
            return Err(Error::Domain(format!("x and {name} are antipodal")));
        }
        let c = BigInt::from(dot(x, v));
        if c.is_positive() && c.clone() * c == BigInt::from(dot(x, x)) * BigInt::from(dot(v, v))
        {
            return Err(Error::Domain(format!("x and {name} coincide")));
        }
    }
    let cy = fd(&xh, &yh).clamp(-1.0, 1.0);
    let cz = fd(&xh, &zh).clamp(-1.0, 1.0);
    let ty: Vec<f64> = yh.iter().zip(&xh).map(|(a, b)| a - cy * b).collect();
    let tz: Vec<f64> = zh.iter().zip(&xh).map(|(a, b)| a - cz * b).collect();
    let ny = fd(&ty, &ty).sqrt();
    let nz = fd(&tz, &tz).sqrt();
    let ca = (fd(&ty, &tz) / (ny * nz)).clamp(-1.0, 1.0);
    Ok((cy.acos(), cz.acos(), ca.acos()))
}

/// Coxeter complex of type `A_{n₁} × … × A_{n_k}` (a join of spheres) with its realization.
#[derive(Clone, Debug)]
pub struct CoxeterComplex {
    ranks: Vec<usize>,
    type_offsets: Vec<VertexType>,
    coord_offsets: Vec<usize>,
    dim_coords: usize,
    complex: SimplicialComplex,
    keys: Vec<(usize, Subset)>,
    lookup: Vec<Vec<Option<VertexId>>>,
}

impl CoxeterComplex {
    /// The irreducible type `A_n`, with the default rank bound.
    pub fn generate(n: usize) -> Result<Self> {
        Self::with_bound(&[n], DEFAULT_RANK_BOUND)
    }

    pub fn new(ranks: &[usize]) -> Result<Self> {
        Self::with_bound(ranks, DEFAULT_RANK_BOUND)
    }

    pub fn with_bound(ranks: &[usize], bound: usize) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::input("Coxeter datum needs at least one factor"));
        }
        for &n in ranks {
            if n == 0 {
                return Err(Error::input("rank must be at least 1"));
            }
            if n > bound {
                return Err(Error::SizeBound {
                    what: "Coxeter rank",
                    actual: n,
                    bound,
                });
            }
        }
        let mut type_offsets = Vec::new();
        let mut coord_offsets = Vec::new();
        let (mut t, mut c) = (0, 0);
        for &n in ranks {
            type_offsets.push(t as VertexType);
            coord_offsets.push(c);
            t += n;
            c += n + 1;
        }
        let mut keys = Vec::new();
        let mut lookup = Vec::new();
        let mut info = BTreeMap::new();
        for (f, &n) in ranks.iter().enumerate() {
            let mut masks: Vec<Subset> = (1..full_mask(n)).collect();
            masks.sort_by_key(|m| (m.count_ones(), *m));
            let mut table = vec![None; full_mask(n) as usize + 1];
            for m in masks {
                let id = keys.len() as VertexId;
                table[m as usize] = Some(id);
                keys.push((f, m));
                let prefix = if ranks.len() > 1 {
                    format!("f{f}:")
                } else {
                    String::new()
                };
                info.insert(
                    id,
                    VertexInfo {
                        vtype: type_offsets[f] + m.count_ones(),
                        label: format!("{prefix}{}", subset_label(m)),
                    },
                );
            }
            lookup.push(table);
        }
        let typeset: BTreeSet<VertexType> = (1..=t as VertexType).collect();
        // chambers: product over factors of maximal chains
        let per_factor: Vec<Vec<Vec<VertexId>>> = ranks
            .iter()
            .enumerate()
            .map(|(f, &n)| {
                permutations(n + 1)
                    .into_iter()
                    .map(|p| {
                        let mut acc = 0;
                        (0..n)
                            .map(|k| {
                                acc |= 1 << p[k];
                                lookup[f][acc as usize].expect("proper subset")
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut facets: Vec<Simplex> = vec![Simplex::empty()];
        for chains in &per_factor {
            let mut next = Vec::with_capacity(facets.len() * chains.len());
            for f in &facets {
                for ch in chains {
                    next.push(f.union(&Simplex::new(ch.iter().copied())));
                }
            }
            facets = next;
        }
        let complex = SimplicialComplex::from_simplices(&info, typeset, facets)?;
        Ok(CoxeterComplex {
            ranks: ranks.to_vec(),
            type_offsets,
            coord_offsets,
            dim_coords: c,
            complex,
            keys,
            lookup,
        })
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    pub fn type_offset(&self, factor: usize) -> VertexType {
        self.type_offsets[factor]
    }

    pub fn key(&self, v: VertexId) -> (usize, Subset) {
        self.keys[v as usize]
    }

    pub fn keys(&self) -> &[(usize, Subset)] {
        &self.keys
    }

    pub fn vertex(&self, factor: usize, s: Subset) -> Option<VertexId> {
        self.lookup
            .get(factor)
            .and_then(|t| t.get(s as usize).copied().flatten())
    }

    pub fn num_vertices(&self) -> usize {
        self.keys.len()
    }

    /// Vertex vector `u_S` placed in the factor's coordinate block.
    pub fn vector(&self, v: VertexId) -> Vec<i64> {
        let (f, s) = self.key(v);
        let n = self.ranks[f] as i64;
        let k = s.count_ones() as i64;
        let mut out = vec![0i64; self.dim_coords];
        for i in 0..=self.ranks[f] {
            out[self.coord_offsets[f] + i] = if s & (1 << i) != 0 { n + 1 - k } else { -k };
        }
        out
    }

    /// `(n+1)|S∩T| − |S||T|`, the inner product up to the positive factor `n+1`
    /// (zero for vertices of different factors).
    pub fn scaled_inner(&self, a: VertexId, b: VertexId) -> i64 {
        let (fa, s) = self.key(a);
        let (fb, t) = self.key(b);
        if fa != fb {
            return 0;
        }
        let n = self.ranks[fa] as i64;
        (n + 1) * (s & t).count_ones() as i64 - s.count_ones() as i64 * t.count_ones() as i64
    }

    pub fn point(&self, carrier: &Simplex, weights: &[Ratio<i64>]) -> Result<RationalPoint> {
        if carrier.is_empty() {
            return Err(Error::input("point needs a nonempty carrier"));
        }
        if carrier.len() != weights.len() {
            return Err(Error::input("one weight per carrier vertex required"));
        }
        if !self.complex.contains(carrier) {
            return Err(Error::NotMember(carrier.clone()));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::input("weights must be positive"));
        }
        let total: Ratio<i64> = weights.iter().copied().sum();
        if total != Ratio::from_integer(1) {
            return Err(Error::input(format!("weights sum to {total}, expected 1")));
        }
        let vecs: Vec<Vec<i64>> = carrier.vertices().iter().map(|v| self.vector(*v)).collect();
        let refs: Vec<&[i64]> = vecs.iter().map(|v| v.as_slice()).collect();
        Ok(RationalPoint {
            carrier: carrier.clone(),
            weights: weights.to_vec(),
            coords: combine(&refs, weights),
        })
    }

    pub fn vertex_point(&self, v: VertexId) -> RationalPoint {
        self.point(&Simplex::vertex(v), &[Ratio::from_integer(1)])
            .expect("vertex is a member")
    }

    pub fn barycenter(&self, s: &Simplex) -> Result<RationalPoint> {
        let k = s.len() as i64;
        self.point(s, &vec![Ratio::new(1, k.max(1)); s.len()])
    }

    pub fn cos_sign(&self, p: &RationalPoint, q: &RationalPoint) -> Sign {
        cos_sign_vec(&p.coords, &q.coords)
    }

    pub fn cmp_cos_threshold(&self, p: &RationalPoint, q: &RationalPoint, t: Ratio<i64>) -> Ordering {
        cmp_cos_threshold_vec(&p.coords, &q.coords, t)
    }

    pub fn antipodal_test(&self, p: &RationalPoint, q: &RationalPoint) -> bool {
        antipodal_vec(&p.coords, &q.coords)
    }

    pub fn apartment_angle_oracle(
        &self,
        x: &RationalPoint,
        y: &RationalPoint,
        z: &RationalPoint,
    ) -> Result<(f64, f64, f64)> {
        angle_oracle(&x.coords, &y.coords, &z.coords)
    }

    pub fn roots(&self) -> Vec<Root> {
        let mut out = Vec::new();
        for (factor, &n) in self.ranks.iter().enumerate() {
            for i in 0..=n {
                for j in 0..=n {
                    if i != j {
                        out.push(Root { factor, i, j });
                    }
                }
            }
        }
        out
    }

    pub fn root_vertices(&self, root: &Root) -> BTreeSet<VertexId> {
        (0..self.keys.len() as VertexId)
            .filter(|v| root.contains(self.key(*v)))
            .collect()
    }

    /// The intersection of all roots containing every vertex of `m`, as a full subcomplex.
    /// Factors in which `m` has no vertex contribute nothing.
    pub fn conv(&self, m: &[Simplex]) -> SimplicialComplex {
        let verts: BTreeSet<VertexId> = m.iter().flat_map(|s| s.vertices().iter().copied()).collect();
        let present: BTreeSet<usize> = verts.iter().map(|v| self.key(*v).0).collect();
        let roots: Vec<Root> = self
            .roots()
            .into_iter()
            .filter(|r| present.contains(&r.factor))
            .filter(|r| verts.iter().all(|v| r.contains(self.key(*v))))
            .collect();
        self.complex.full_subcomplex_by(|v| {
            let key = self.key(v);
            present.contains(&key.0) && roots.iter().all(|r| r.contains(key))
        })
    }

    pub fn opposite_vertex(&self, v: VertexId) -> VertexId {
        let (f, s) = self.key(v);
        self.vertex(f, full_mask(self.ranks[f]) & !s).expect("complement is proper")
    }

    /// Vertexwise complement map.
    pub fn opposition(&self, s: &Simplex) -> Simplex {
        Simplex::new(s.vertices().iter().map(|v| self.opposite_vertex(*v)))
    }

    /// Chamber of the given per-factor permutations: `{p(0)}, {p(0),p(1)}, …`.
    pub fn chamber(&self, w: &WeylElement) -> Simplex {
        let mut out = Vec::new();
        for (f, p) in w.0.iter().enumerate() {
            let mut acc = 0;
            for k in 0..self.ranks[f] {
                acc |= 1 << p.apply(k);
                out.push(self.vertex(f, acc).expect("proper subset"));
            }
        }
        Simplex::new(out)
    }

    /// Inverse of [`CoxeterComplex::chamber`].
    pub fn chamber_permutation(&self, c: &Simplex) -> Result<WeylElement> {
        let mut perms = Vec::new();
        for (f, &n) in self.ranks.iter().enumerate() {
            let mut chain: Vec<Subset> = c
                .vertices()
                .iter()
                .map(|v| self.key(*v))
                .filter(|(g, _)| *g == f)
                .map(|(_, s)| s)
                .collect();
            chain.sort_by_key(|s| s.count_ones());
            if chain.len() != n || chain.iter().enumerate().any(|(k, s)| s.count_ones() as usize != k + 1) {
                return Err(Error::input(format!("{c:?} is not a chamber")));
            }
            let mut p = Vec::with_capacity(n + 1);
            let mut prev = 0;
            for s in chain.iter().copied().chain(std::iter::once(full_mask(n))) {
                let diff = s & !prev;
                if diff.count_ones() != 1 || prev & !s != 0 {
                    return Err(Error::input(format!("{c:?} is not a chamber")));
                }
                p.push(diff.trailing_zeros() as usize);
                prev = s;
            }
            perms.push(Permutation(p));
        }
        Ok(WeylElement(perms))
    }

    /// Weyl distance of two chambers from the intersection table of their subset chains.
    pub fn weyl_distance(&self, c: &Simplex, d: &Simplex) -> Result<WeylElement> {
        let pc = self.chamber_permutation(c)?;
        let pd = self.chamber_permutation(d)?;
        Ok(WeylElement(
            self.ranks
                .iter()
                .enumerate()
                .map(|(f, &n)| {
                    let prefix = |p: &Permutation, k: usize| -> Subset {
                        (0..k).fold(0, |acc, i| acc | (1 << p.apply(i)))
                    };
                    relative_position(n, |i, j| {
                        (prefix(&pc.0[f], i) & prefix(&pd.0[f], j)).count_ones() as usize
                    })
                })
                .collect(),
        ))
    }
}

/// All permutations of `0..m` in lexicographic order.
pub fn permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..m).collect();
    loop {
        out.push(p.clone());
        // next lexicographic permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| p[i] < p[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| p[j] > p[i]).expect("successor exists");
        p.swap(i, j);
        p[i + 1..].reverse();
    }
    out
}

pub fn parse_ratio(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((a, b)) => {
            let a: i64 = a.trim().parse().map_err(|_| Error::input(format!("bad rational {s}")))?;
            let b: i64 = b.trim().parse().map_err(|_| Error::input(format!("bad rational {s}")))?;
            if b.is_zero() {
                return Err(Error::input(format!("zero denominator in {s}")));
            }
            Ratio::new(a, b)
        }
        None => Ratio::from_integer(s.parse().map_err(|_| Error::input(format!("bad rational {s}")))?),
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> CoxeterComplex {
        CoxeterComplex::generate(2).unwrap()
    }

    fn v(c: &CoxeterComplex, elems: &[usize]) -> VertexId {
        c.vertex(0, subset_from_elements(elems).unwrap()).unwrap()
    }

    #[test]
    fn generated_sizes() {
        let a1 = CoxeterComplex::generate(1).unwrap();
        assert_eq!(a1.complex().f_vector(), vec![2]);
        assert_eq!(a2().complex().f_vector(), vec![6, 6]);
        let a3 = CoxeterComplex::generate(3).unwrap();
        assert_eq!(a3.complex().f_vector(), vec![14, 36, 24]);
        assert!(a3.complex().is_chamber_complex());
        assert!(matches!(
            CoxeterComplex::generate(6),
            Err(Error::SizeBound { .. })
        ));
    }

    #[test]
    fn vectors_sum_to_zero_and_pair_exactly() {
        let c = CoxeterComplex::generate(3).unwrap();
        for a in 0..c.num_vertices() as VertexId {
            let u = c.vector(a);
            assert_eq!(u.iter().sum::<i64>(), 0);
            assert!(u.iter().any(|x| *x != 0));
            for b in 0..c.num_vertices() as VertexId {
                assert_eq!(dot(&u, &c.vector(b)), 4 * c.scaled_inner(a, b) as i128);
            }
            assert!(antipodal_vec(&u, &c.vector(c.opposite_vertex(a))));
        }
    }

    #[test]
    fn cos_sign_examples() {
        let c = a2();
        let p1 = c.vertex_point(v(&c, &[1]));
        let p12 = c.vertex_point(v(&c, &[1, 2]));
        let p23 = c.vertex_point(v(&c, &[2, 3]));
        let p2 = c.vertex_point(v(&c, &[2]));
        assert_eq!(c.cos_sign(&p1, &p12), Sign::Pos);
        assert_eq!(c.cos_sign(&p1, &p23), Sign::Neg);
        let mid = c
            .barycenter(&Simplex::new([v(&c, &[1]), v(&c, &[1, 2])]))
            .unwrap();
        assert_eq!(c.cos_sign(&mid, &p2), Sign::Zero);
    }

    #[test]
    fn threshold_examples() {
        let c = a2();
        let p1 = c.vertex_point(v(&c, &[1]));
        let p2 = c.vertex_point(v(&c, &[2]));
        let p12 = c.vertex_point(v(&c, &[1, 2]));
        assert_eq!(c.cmp_cos_threshold(&p1, &p1, Ratio::new(1, 2)), Ordering::Greater);
        assert_eq!(c.cmp_cos_threshold(&p1, &p2, Ratio::new(-1, 4)), Ordering::Less);
        assert_eq!(c.cmp_cos_threshold(&p1, &p2, Ratio::new(-1, 2)), Ordering::Equal);
        assert_eq!(c.cmp_cos_threshold(&p1, &p12, Ratio::new(1, 2)), Ordering::Equal);
        for a in [&p1, &p2, &p12] {
            for b in [&p1, &p2, &p12] {
                let s = c.cos_sign(a, b);
                let o = c.cmp_cos_threshold(a, b, Ratio::from_integer(0));
                assert_eq!(Sign::from(o), s);
            }
        }
    }

    #[test]
    fn conv_examples() {
        let c = a2();
        let a = v(&c, &[1]);
        let b = v(&c, &[2]);
        let ab = v(&c, &[1, 2]);
        let path = c.conv(&[Simplex::vertex(a), Simplex::vertex(b)]);
        assert_eq!(
            path.facets(),
            &[Simplex::new([a, ab]), Simplex::new([b, ab])]
        );
        let edge = c.conv(&[Simplex::vertex(a), Simplex::vertex(ab)]);
        assert_eq!(edge.facets(), &[Simplex::new([a, ab])]);
        let a3 = CoxeterComplex::generate(3).unwrap();
        for ch in a3.complex().facets() {
            assert_eq!(a3.conv(std::slice::from_ref(ch)).facets(), std::slice::from_ref(ch));
        }
    }

    #[test]
    fn opposition_examples() {
        let c = a2();
        assert_eq!(c.opposite_vertex(v(&c, &[1])), v(&c, &[2, 3]));
        let m1 = c.barycenter(&Simplex::new([v(&c, &[1]), v(&c, &[1, 2])])).unwrap();
        let m2 = c.barycenter(&Simplex::new([v(&c, &[3]), v(&c, &[2, 3])])).unwrap();
        assert!(c.antipodal_test(&m1, &m2));
        assert!(!c.antipodal_test(&m1, &m1));
    }

    #[test]
    fn opposition_is_type_reversing_involution_on_chambers() {
        let c = CoxeterComplex::generate(3).unwrap();
        let facets: BTreeSet<_> = c.complex().facets().iter().cloned().collect();
        for ch in c.complex().facets() {
            let op = c.opposition(ch);
            assert!(facets.contains(&op));
            assert_eq!(c.opposition(&op), *ch);
            for x in ch.vertices() {
                let t = c.complex().vtype(*x).unwrap();
                assert_eq!(c.complex().vtype(c.opposite_vertex(*x)).unwrap(), 4 - t);
            }
            assert_eq!(
                c.weyl_distance(ch, &op).unwrap(),
                WeylElement::longest(&[3])
            );
        }
    }

    #[test]
    fn roots_split_into_halves_meeting_in_wall() {
        let c = CoxeterComplex::generate(3).unwrap();
        for r in c.roots() {
            let a = c.root_vertices(&r);
            let b = c.root_vertices(&r.opposite());
            assert_eq!(a.union(&b).count(), c.num_vertices());
            let wall: BTreeSet<_> = (0..c.num_vertices() as VertexId)
                .filter(|x| r.on_wall(c.key(*x)))
                .collect();
            assert_eq!(a.intersection(&b).copied().collect::<BTreeSet<_>>(), wall);
            for x in &a {
                let u = c.vector(*x);
                assert!(u[r.i] - u[r.j] >= 0);
            }
        }
    }

    #[test]
    fn conv_is_a_closure_operator() {
        let c = CoxeterComplex::generate(3).unwrap();
        let all = c.complex().simplices();
        for (i, a) in all.iter().enumerate().step_by(7) {
            for b in all.iter().skip(i).step_by(11) {
                if a.is_empty() && b.is_empty() {
                    continue;
                }
                let m = vec![a.clone(), b.clone()];
                let h = c.conv(&m);
                assert!(h.contains(a) && h.contains(b));
                assert_eq!(c.conv(h.facets()), h);
                let smaller = c.conv(std::slice::from_ref(a));
                if !a.is_empty() {
                    assert!(smaller.is_subcomplex_of(&h));
                }
            }
        }
    }

    #[test]
    fn edges_and_chambers_are_short() {
        for n in 1..=4 {
            let c = CoxeterComplex::generate(n).unwrap();
            for f in c.complex().facets() {
                for a in f.vertices() {
                    for b in f.vertices() {
                        assert_eq!(cos_sign_vec(&c.vector(*a), &c.vector(*b)), Sign::Pos);
                    }
                }
            }
        }
        let j = CoxeterComplex::new(&[1, 2]).unwrap();
        let zero = j.complex().facets().iter().any(|f| {
            f.vertices().iter().any(|a| {
                f.vertices()
                    .iter()
                    .any(|b| cos_sign_vec(&j.vector(*a), &j.vector(*b)) == Sign::Zero)
            })
        });
        assert!(zero);
    }

    #[test]
    fn relative_position_of_coxeter_chambers() {
        let c = a2();
        let ch = c.chamber(&WeylElement(vec![Permutation(vec![0, 1, 2])]));
        assert_eq!(c.weyl_distance(&ch, &ch).unwrap(), WeylElement::identity(&[2]));
        let adj = c.chamber(&WeylElement(vec![Permutation(vec![0, 2, 1])]));
        assert_eq!(
            c.weyl_distance(&ch, &adj).unwrap(),
            WeylElement(vec![Permutation::simple(3, 2)])
        );
        for a in c.complex().facets() {
            for b in c.complex().facets() {
                let w = c.weyl_distance(a, b).unwrap();
                assert_eq!(c.weyl_distance(b, a).unwrap(), w.inverse());
                // w = ρ⁻¹∘π
                let pa = c.chamber_permutation(a).unwrap();
                let pb = c.chamber_permutation(b).unwrap();
                assert_eq!(w.0[0], pb.0[0].inverse().compose(&pa.0[0]));
            }
        }
    }

    #[test]
    fn hexagon_triangle_law_of_cosines() {
        let c = a2();
        let pts: Vec<_> = [&[1][..], &[2], &[3]]
            .iter()
            .map(|e| c.vertex_point(v(&c, e)))
            .collect();
        let (a, b, g) = c.apartment_angle_oracle(&pts[0], &pts[1], &pts[2]).unwrap();
        let third = (c.cmp_cos_threshold(&pts[1], &pts[2], Ratio::new(-1, 2)) == Ordering::Equal)
            .then_some(2.0 * std::f64::consts::PI / 3.0)
            .unwrap();
        assert!((a - third).abs() < 1e-12 && (b - third).abs() < 1e-12);
        let rhs = a.cos() * b.cos() + a.sin() * b.sin() * g.cos();
        assert!((third.cos() - rhs).abs() < 1e-12);
        let (_, _, zero) = c.apartment_angle_oracle(&pts[0], &pts[1], &pts[1]).unwrap();
        assert!(zero.abs() < 1e-6);
        let anti = c.vertex_point(v(&c, &[2, 3]));
        assert!(c.apartment_angle_oracle(&pts[0], &anti, &pts[1]).is_err());
        assert!(c.apartment_angle_oracle(&pts[0], &pts[0], &pts[1]).is_err());
    }

    #[test]
    fn link_metric_is_the_angle() {
        // The link of the vertex {1,2} in A_3 is A_1 * A_1: {1},{2} versus {1,2,3},{1,2,4}.
        let c = CoxeterComplex::generate(3).unwrap();
        let x = c.vertex_point(v(&c, &[1, 2]));
        let lk = c.complex().link(&Simplex::vertex(v(&c, &[1, 2]))).unwrap();
        let lk_vertices: Vec<VertexId> = lk.vertex_ids().collect();
        assert_eq!(lk_vertices.len(), 4);
        for a in &lk_vertices {
            for b in &lk_vertices {
                if a == b {
                    continue;
                }
                let (_, _, ang) = c
                    .apartment_angle_oracle(&x, &c.vertex_point(*a), &c.vertex_point(*b))
                    .unwrap();
                let (sa, sb) = (c.key(*a).1, c.key(*b).1);
                let same_side = (sa.count_ones() < 2) == (sb.count_ones() < 2);
                let expected = if same_side {
                    std::f64::consts::PI
                } else {
                    std::f64::consts::FRAC_PI_2
                };
                assert!((ang - expected).abs() < 1e-9, "{a} {b} {ang}");
            }
        }
    }

    #[test]
    fn permutations_count() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(permutations(1), vec![vec![0]]);
    }

    #[test]
    fn parse_ratios() {
        assert_eq!(parse_ratio("1/2").unwrap(), Ratio::new(1, 2));
        assert_eq!(parse_ratio(" -3 ").unwrap(), Ratio::from_integer(-3));
        assert!(parse_ratio("1/0").is_err());
    }
}
