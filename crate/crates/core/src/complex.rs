//! Abstract simplicial complexes with typed vertices.
//!
//! A [`SimplicialComplex`] is stored by its facets (maximal simplices). Membership of an
//! arbitrary simplex is a subset query against the facets through a vertex index. The empty
//! simplex belongs to every complex except the void complex, which has no simplices at all.
//! The complex whose only simplex is the empty simplex is called the *empty complex*; it is
//! the neutral element of [`SimplicialComplex::join`] and has dimension −1.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type VertexType = u32;

/// A simplex as a strictly increasing list of vertex ids. The empty list is the empty simplex.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Simplex(Vec<VertexId>);

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Simplex {
    pub fn empty() -> Self {
        Simplex(Vec::new())
    }

    pub fn new(vertices: impl IntoIterator<Item = VertexId>) -> Self {
        let mut v: Vec<VertexId> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Simplex(v)
    }

    pub fn vertex(v: VertexId) -> Self {
        Simplex(vec![v])
    }

    pub fn vertices(&self) -> &[VertexId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dim(&self) -> isize {
        self.0.len() as isize - 1
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// `self ⊆ other`.
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

    pub fn union(&self, other: &Simplex) -> Simplex {
        Simplex::new(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn intersection(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.iter().copied().filter(|v| other.contains_vertex(*v)).collect())
    }

    pub fn difference(&self, other: &Simplex) -> Simplex {
        Simplex(self.0.iter().copied().filter(|v| !other.contains_vertex(*v)).collect())
    }

    pub fn is_disjoint(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| !other.contains_vertex(*v))
    }

    pub fn without(&self, v: VertexId) -> Simplex {
        Simplex(self.0.iter().copied().filter(|w| *w != v).collect())
    }

    pub fn with(&self, v: VertexId) -> Simplex {
        let mut s = self.clone();
        if let Err(pos) = s.0.binary_search(&v) {
            s.0.insert(pos, v);
        }
        s
    }

    pub fn filter(&self, mut keep: impl FnMut(VertexId) -> bool) -> Simplex {
        Simplex(self.0.iter().copied().filter(|v| keep(*v)).collect())
    }

    /// All faces including the empty simplex and `self`.
    pub fn faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = self.0.len();
        assert!(n < 32, "simplex too large for face enumeration");
        (0u32..(1u32 << n)).map(move |mask| {
            Simplex(
                (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| self.0[i])
                    .collect(),
            )
        })
    }

    /// Codimension-one faces.
    pub fn boundary_faces(&self) -> impl Iterator<Item = Simplex> + '_ {
        self.0.iter().map(move |v| self.without(*v))
    }
}

impl FromIterator<VertexId> for Simplex {
    fn from_iter<T: IntoIterator<Item = VertexId>>(iter: T) -> Self {
        Simplex::new(iter)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexInfo {
    pub vtype: VertexType,
    pub label: String,
}

/// A finite simplicial complex with typed vertices, stored by facets.
#[derive(Clone)]
pub struct SimplicialComplex {
    vertices: BTreeMap<VertexId, VertexInfo>,
    facets: Vec<Simplex>,
    typeset: BTreeSet<VertexType>,
    index: HashMap<VertexId, Vec<u32>>,
    simplices: OnceLock<Vec<Simplex>>,
}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SimplicialComplex")
            .field("vertices", &self.vertices.len())
            .field("facets", &self.facets)
            .finish()
    }
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        self.facets == other.facets
    }
}

impl Eq for SimplicialComplex {}

/// Keeps only the inclusion-maximal simplices, sorted ascending.
pub fn maximal_simplices(mut simplices: Vec<Simplex>) -> Vec<Simplex> {
    simplices.sort_unstable_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    simplices.dedup();
    let mut kept: Vec<Simplex> = Vec::new();
    let mut index: HashMap<VertexId, Vec<usize>> = HashMap::new();
    for s in simplices {
        let dominated = match s.vertices().first() {
            None => !kept.is_empty(),
            Some(v) => index
                .get(v)
                .map(|ids| ids.iter().any(|&i| s.is_face_of(&kept[i])))
                .unwrap_or(false),
        };
        if !dominated {
            for v in s.vertices() {
                index.entry(*v).or_default().push(kept.len());
            }
            kept.push(s);
        }
    }
    kept.sort_unstable();
    kept
}

impl SimplicialComplex {
    /// Builds a complex from vertex data and a (not necessarily reduced) list of simplices.
    /// Vertex data for vertices that do not occur in any simplex is dropped.
    pub fn from_simplices(
        vertex_info: &BTreeMap<VertexId, VertexInfo>,
        typeset: BTreeSet<VertexType>,
        simplices: Vec<Simplex>,
    ) -> Result<Self> {
        for s in &simplices {
            for v in s.vertices() {
                if !vertex_info.contains_key(v) {
                    return Err(Error::input(format!("unknown vertex {v} in simplex {s:?}")));
                }
            }
        }
        Ok(Self::assemble(vertex_info, typeset, maximal_simplices(simplices)))
    }

    fn assemble(
        vertex_info: &BTreeMap<VertexId, VertexInfo>,
        typeset: BTreeSet<VertexType>,
        facets: Vec<Simplex>,
    ) -> Self {
        let mut index: HashMap<VertexId, Vec<u32>> = HashMap::new();
        let mut vertices = BTreeMap::new();
        for (i, f) in facets.iter().enumerate() {
            for v in f.vertices() {
                index.entry(*v).or_default().push(i as u32);
                vertices
                    .entry(*v)
                    .or_insert_with(|| vertex_info[v].clone());
            }
        }
        SimplicialComplex {
            vertices,
            facets,
            typeset,
            index,
            simplices: OnceLock::new(),
        }
    }

    /// Subcomplex of `self` generated by `simplices` (which must be simplices of `self`'s
    /// vertex set; membership is not checked).
    pub fn generated(&self, simplices: Vec<Simplex>) -> Self {
        Self::assemble(&self.vertices, self.typeset.clone(), maximal_simplices(simplices))
    }

    /// The complex without any simplex, not even the empty one.
    pub fn void(typeset: BTreeSet<VertexType>) -> Self {
        Self::assemble(&BTreeMap::new(), typeset, Vec::new())
    }

    /// The complex whose only simplex is the empty simplex.
    pub fn empty(typeset: BTreeSet<VertexType>) -> Self {
        Self::assemble(&BTreeMap::new(), typeset, vec![Simplex::empty()])
    }

    pub fn facets(&self) -> &[Simplex] {
        &self.facets
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertex_set(&self) -> BTreeSet<VertexId> {
        self.vertices.keys().copied().collect()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex_info(&self, v: VertexId) -> Option<&VertexInfo> {
        self.vertices.get(&v)
    }

    pub fn vertex_infos(&self) -> &BTreeMap<VertexId, VertexInfo> {
        &self.vertices
    }

    pub fn vtype(&self, v: VertexId) -> Option<VertexType> {
        self.vertices.get(&v).map(|i| i.vtype)
    }

    pub fn typeset(&self) -> &BTreeSet<VertexType> {
        &self.typeset
    }

    pub fn types_of(&self, s: &Simplex) -> BTreeSet<VertexType> {
        s.vertices().iter().filter_map(|v| self.vtype(*v)).collect()
    }

    pub fn is_void(&self) -> bool {
        self.facets.is_empty()
    }

    /// True for the complex `{∅}`.
    pub fn is_empty_complex(&self) -> bool {
        self.facets.len() == 1 && self.facets[0].is_empty()
    }

    /// Dimension; −1 for the empty and the void complex.
    pub fn dim(&self) -> isize {
        self.facets.iter().map(|f| f.dim()).max().unwrap_or(-1)
    }

    pub fn is_pure(&self) -> bool {
        let d = self.dim();
        self.facets.iter().all(|f| f.dim() == d)
    }

    /// Every facet carries the full type set.
    pub fn is_chamber_complex(&self) -> bool {
        let n = self.typeset.len();
        self.facets.iter().all(|f| {
            f.len() == n && self.types_of(f).len() == n
        })
    }

    fn facet_ids_containing(&self, s: &Simplex) -> Vec<usize> {
        match s.vertices().iter().min_by_key(|v| self.index.get(v).map_or(0, |l| l.len())) {
            None => (0..self.facets.len()).collect(),
            Some(v) => self
                .index
                .get(v)
                .map(|ids| {
                    ids.iter()
                        .map(|&i| i as usize)
                        .filter(|&i| s.is_face_of(&self.facets[i]))
                        .collect()
                })
                .unwrap_or_default(),
        }
    }

    pub fn facets_containing(&self, s: &Simplex) -> Vec<&Simplex> {
        self.facet_ids_containing(s)
            .into_iter()
            .map(|i| &self.facets[i])
            .collect()
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        match s.vertices().first() {
            None => !self.facets.is_empty(),
            Some(_) => !self.facet_ids_containing(s).is_empty(),
        }
    }

    fn require(&self, s: &Simplex) -> Result<()> {
        if self.contains(s) {
            Ok(())
        } else {
            Err(Error::NotMember(s.clone()))
        }
    }

    /// All simplices including the empty simplex, ordered by dimension then lexicographically.
    pub fn simplices(&self) -> &[Simplex] {
        self.simplices.get_or_init(|| {
            let mut set: HashSet<Simplex> = HashSet::new();
            for f in &self.facets {
                set.extend(f.faces());
            }
            let mut all: Vec<Simplex> = set.into_iter().collect();
            all.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
            all
        })
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices().len()
    }

    pub fn simplices_of_dim(&self, k: isize) -> impl Iterator<Item = &Simplex> + '_ {
        self.simplices().iter().filter(move |s| s.dim() == k)
    }

    /// Number of k-simplices for k = 0..=dim.
    pub fn f_vector(&self) -> Vec<usize> {
        let d = self.dim();
        let mut f = vec![0usize; (d + 1).max(0) as usize];
        for s in self.simplices() {
            if !s.is_empty() {
                f[s.len() - 1] += 1;
            }
        }
        f
    }

    /// Closed star: all simplices having a common coface with `s`.
    pub fn star(&self, s: &Simplex) -> Result<Self> {
        self.require(s)?;
        let facets = self.facets_containing(s).into_iter().cloned().collect();
        Ok(Self::assemble(&self.vertices, self.typeset.clone(), facets))
    }

    /// Open star as a simplex set: the simplices containing `s`.
    pub fn open_star(&self, s: &Simplex) -> Result<Vec<Simplex>> {
        self.require(s)?;
        let mut set: BTreeSet<Simplex> = BTreeSet::new();
        for f in self.facets_containing(s) {
            let rest = f.difference(s);
            for extra in rest.faces() {
                set.insert(extra.union(s));
            }
        }
        Ok(set.into_iter().collect())
    }

    pub fn link(&self, s: &Simplex) -> Result<Self> {
        self.require(s)?;
        let facets = self
            .facets_containing(s)
            .into_iter()
            .map(|f| f.difference(s))
            .collect();
        Ok(Self::assemble(
            &self.vertices,
            self.typeset.clone(),
            maximal_simplices(facets),
        ))
    }

    /// Closed star minus open star.
    pub fn boundary_of_star(&self, s: &Simplex) -> Result<Self> {
        self.require(s)?;
        let mut faces = Vec::new();
        for f in self.facets_containing(s) {
            for v in s.vertices() {
                faces.push(f.without(*v));
            }
        }
        Ok(Self::assemble(
            &self.vertices,
            self.typeset.clone(),
            maximal_simplices(faces),
        ))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        if let Some(v) = self.vertices.keys().find(|v| other.vertices.contains_key(v)) {
            return Err(Error::input(format!("join: vertex id {v} occurs in both factors")));
        }
        let used_a: BTreeSet<_> = self.vertices.values().map(|i| i.vtype).collect();
        let used_b: BTreeSet<_> = other.vertices.values().map(|i| i.vtype).collect();
        if let Some(t) = used_a.intersection(&used_b).next() {
            return Err(Error::input(format!("join: vertex type {t} occurs in both factors")));
        }
        let mut info = self.vertices.clone();
        info.extend(other.vertices.iter().map(|(k, v)| (*k, v.clone())));
        let typeset = self.typeset.union(&other.typeset).copied().collect();
        let mut facets = Vec::with_capacity(self.facets.len() * other.facets.len());
        for a in &self.facets {
            for b in &other.facets {
                facets.push(a.union(b));
            }
        }
        facets.sort_unstable();
        Ok(Self::assemble(&info, typeset, facets))
    }

    /// All simplices of `self` with vertex set inside `keep`.
    pub fn full_subcomplex(&self, keep: &BTreeSet<VertexId>) -> Self {
        self.full_subcomplex_by(|v| keep.contains(&v))
    }

    pub fn full_subcomplex_by(&self, mut keep: impl FnMut(VertexId) -> bool) -> Self {
        if self.facets.is_empty() {
            return self.clone();
        }
        let facets = self.facets.iter().map(|f| f.filter(&mut keep)).collect();
        Self::assemble(&self.vertices, self.typeset.clone(), maximal_simplices(facets))
    }

    pub fn skeleton(&self, k: isize) -> Self {
        let mut out = Vec::new();
        for f in &self.facets {
            if f.dim() <= k {
                out.push(f.clone());
            } else {
                out.extend(f.faces().filter(|s| s.dim() == k));
            }
        }
        Self::assemble(&self.vertices, self.typeset.clone(), maximal_simplices(out))
    }

    /// Number of connected components (0 for the empty and void complexes).
    pub fn components(&self) -> usize {
        let ids: Vec<VertexId> = self.vertices.keys().copied().collect();
        let pos: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, v)| (*v, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for f in &self.facets {
            let vs = f.vertices();
            for w in vs.iter().skip(1) {
                let a = find(&mut parent, pos[&vs[0]]);
                let b = find(&mut parent, pos[w]);
                parent[a] = b;
            }
        }
        (0..ids.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    /// Subcomplex of simplices that contain none of `centers` (removal of open stars).
    pub fn remove_open_stars(&self, centers: &[Simplex]) -> Self {
        let kept: Vec<Simplex> = self
            .simplices()
            .iter()
            .filter(|s| !centers.iter().any(|c| c.is_face_of(s)))
            .cloned()
            .collect();
        if kept.is_empty() {
            return Self::void(self.typeset.clone());
        }
        self.generated(kept)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut info = self.vertices.clone();
        info.extend(other.vertices.iter().map(|(k, v)| (*k, v.clone())));
        let typeset = self.typeset.union(&other.typeset).copied().collect();
        let facets = self.facets.iter().chain(other.facets.iter()).cloned().collect();
        Self::assemble(&info, typeset, maximal_simplices(facets))
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut pieces = Vec::new();
        for a in &self.facets {
            for b in other.facets_meeting(a) {
                pieces.push(a.intersection(b));
            }
        }
        if self.is_void() || other.is_void() {
            return Self::void(self.typeset.clone());
        }
        if pieces.is_empty() {
            pieces.push(Simplex::empty());
        }
        Self::assemble(&self.vertices, self.typeset.clone(), maximal_simplices(pieces))
    }

    fn facets_meeting<'a>(&'a self, s: &Simplex) -> impl Iterator<Item = &'a Simplex> + 'a {
        let mut ids: BTreeSet<u32> = BTreeSet::new();
        for v in s.vertices() {
            if let Some(l) = self.index.get(v) {
                ids.extend(l.iter().copied());
            }
        }
        ids.into_iter().map(move |i| &self.facets[i as usize])
    }

    pub fn is_subcomplex_of(&self, other: &Self) -> bool {
        self.facets.iter().all(|f| other.contains(f))
    }

    /// Applies an injective vertex relabeling.
    pub fn relabel(&self, map: &BTreeMap<VertexId, VertexId>) -> Self {
        let info = self
            .vertices
            .iter()
            .map(|(k, v)| (map[k], v.clone()))
            .collect();
        let facets = self
            .facets
            .iter()
            .map(|f| Simplex::new(f.vertices().iter().map(|v| map[v])))
            .collect();
        Self::assemble(&info, self.typeset.clone(), maximal_simplices(facets))
    }

    pub fn to_file(&self) -> ComplexFile {
        ComplexFile {
            typeset: self.typeset.iter().copied().collect(),
            vertices: self
                .vertices
                .iter()
                .map(|(id, info)| VertexEntry {
                    id: *id,
                    vtype: info.vtype,
                    label: info.label.clone(),
                })
                .collect(),
            facets: self.facets.iter().map(|f| f.vertices().to_vec()).collect(),
            realization: None,
        }
    }

    pub fn from_file(file: &ComplexFile) -> Result<Self> {
        let mut info = BTreeMap::new();
        for v in &file.vertices {
            if info
                .insert(
                    v.id,
                    VertexInfo {
                        vtype: v.vtype,
                        label: v.label.clone(),
                    },
                )
                .is_some()
            {
                return Err(Error::input(format!("duplicate vertex id {}", v.id)));
            }
        }
        let facets = file.facets.iter().map(|f| Simplex::new(f.iter().copied())).collect();
        Self::from_simplices(&info, file.typeset.iter().copied().collect(), facets)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexEntry {
    pub id: VertexId,
    pub vtype: VertexType,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizationEntry {
    pub id: VertexId,
    pub coords: Vec<i64>,
}

/// On-disk complex format; all arrays sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexFile {
    pub typeset: Vec<VertexType>,
    pub vertices: Vec<VertexEntry>,
    pub facets: Vec<Vec<VertexId>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization: Option<Vec<RealizationEntry>>,
}
