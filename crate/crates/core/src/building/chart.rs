use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::complex::{Simplex, VertexId};

/// A type-preserving isomorphism from the Coxeter model onto an apartment, given by an
/// ordered frame of points per factor. Coxeter vertex `(f, S)` maps to the span of the
/// frame points of factor `f` indexed by `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApartmentChart {
    pub(crate) frames: Vec<Vec<VertexId>>,
    pub(crate) forward: Vec<VertexId>,
    pub(crate) backward: HashMap<VertexId, VertexId>,
}

/// Serializable frame description: per factor, the ordered frame points as building ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameSpec(pub Vec<Vec<VertexId>>);

impl ApartmentChart {
    pub fn frames(&self) -> &[Vec<VertexId>] {
        &self.frames
    }

    pub fn frame_spec(&self) -> FrameSpec {
        FrameSpec(self.frames.clone())
    }

    /// Building vertex of a Coxeter vertex.
    pub fn image_of(&self, coxeter_vertex: VertexId) -> VertexId {
        self.forward[coxeter_vertex as usize]
    }

    pub fn preimage_of(&self, v: VertexId) -> Option<VertexId> {
        self.backward.get(&v).copied()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.backward.contains_key(&v)
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        s.vertices().iter().all(|v| self.contains_vertex(*v))
    }

    pub fn to_building(&self, s: &Simplex) -> Simplex {
        Simplex::new(s.vertices().iter().map(|v| self.image_of(*v)))
    }

    pub fn to_coxeter(&self, s: &Simplex) -> Option<Simplex> {
        s.vertices()
            .iter()
            .map(|v| self.preimage_of(*v))
            .collect::<Option<Vec<_>>>()
            .map(Simplex::new)
    }

    pub fn image_vertices(&self) -> BTreeSet<VertexId> {
        self.forward.iter().copied().collect()
    }
}
