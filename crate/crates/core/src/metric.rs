//! Poles and the exact trichotomy of vertices against `π/2` (or a rational cosine threshold).
//!
//! Distances from a pole `x` are read off after retracting onto an apartment chart that
//! contains `x`, centred at a chart chamber whose closure contains `x`; such retractions
//! preserve distances from `x`, so all comparisons are exact.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::building::{ApartmentChart, Building};
use crate::complex::{Simplex, VertexId};
use crate::coxeter::{antipodal_vec, cmp_cos_threshold_vec, parse_ratio, subset_from_elements, RationalPoint};
use crate::error::{Error, Result};

/// A rational point of the building, given in coordinates of one apartment chart.
#[derive(Clone, Debug)]
pub struct Pole {
    pub chart: ApartmentChart,
    pub point: RationalPoint,
    pub carrier: Simplex,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CarrierEntry {
    Subset(Vec<usize>),
    Factored { factor: usize, subset: Vec<usize> },
}

/// Input form of a pole.
///
/// `{"vertex": 3}`, `{"barycenter": [3, 9]}`, `{"vertices": [3, 9], "weights": ["1/3", "2/3"]}`,
/// or an explicit frame: one list of point vectors per factor, the carrier as subsets of frame
/// indices (1-based), and weights.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoleSpec {
    Vertex {
        vertex: VertexId,
    },
    Barycenter {
        barycenter: Vec<VertexId>,
    },
    Weighted {
        vertices: Vec<VertexId>,
        weights: Vec<String>,
    },
    Frame {
        frame: Vec<Vec<Vec<u8>>>,
        carrier: Vec<CarrierEntry>,
        weights: Vec<String>,
    },
}

impl PoleSpec {
    /// Command-line shorthand: `vertex:ID` or `barycenter:ID,ID,…`.
    pub fn parse_shorthand(s: &str) -> Result<Self> {
        let ids = |rest: &str| -> Result<Vec<VertexId>> {
            rest.split(',')
                .map(|x| x.trim().parse::<VertexId>().map_err(|e| Error::input(format!("bad vertex id {x:?}: {e}"))))
                .collect()
        };
        if let Some(rest) = s.strip_prefix("vertex:") {
            let v = ids(rest)?;
            match v.as_slice() {
                [v] => Ok(PoleSpec::Vertex { vertex: *v }),
                _ => Err(Error::input("vertex: takes exactly one id")),
            }
        } else if let Some(rest) = s.strip_prefix("barycenter:") {
            Ok(PoleSpec::Barycenter { barycenter: ids(rest)? })
        } else {
            Err(Error::input(format!("unrecognised pole {s:?}")))
        }
    }
}

impl Pole {
    /// The point of `chart` with the given Coxeter-model carrier and weights.
    pub fn new(b: &Building, chart: ApartmentChart, carrier: &Simplex, weights: &[Ratio<i64>]) -> Result<Self> {
        let point = b.coxeter().point(carrier, weights)?;
        let carrier = chart.to_building(carrier);
        Ok(Pole { chart, point, carrier })
    }

    /// Point with the given weights on a building simplex, charted in some apartment through it.
    pub fn weighted(b: &Building, s: &Simplex, weights: &[Ratio<i64>]) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::input("a pole needs a nonempty carrier"));
        }
        let chart = b.common_apartment(s, s)?;
        let cs = chart.to_coxeter(s).expect("chart contains the simplex");
        // weights follow the building vertex order; reorder for the Coxeter ids
        let mut pairs: Vec<(VertexId, Ratio<i64>)> = s
            .vertices()
            .iter()
            .zip(weights)
            .map(|(v, w)| (chart.preimage_of(*v).expect("in chart"), *w))
            .collect();
        pairs.sort();
        debug_assert_eq!(Simplex::new(pairs.iter().map(|p| p.0)), cs);
        let w: Vec<Ratio<i64>> = pairs.into_iter().map(|p| p.1).collect();
        if w.len() != s.len() {
            return Err(Error::input("one weight per carrier vertex required"));
        }
        Pole::new(b, chart, &cs, &w)
    }

    pub fn vertex(b: &Building, v: VertexId) -> Result<Self> {
        Pole::weighted(b, &Simplex::vertex(v), &[Ratio::from_integer(1)])
    }

    pub fn barycenter(b: &Building, s: &Simplex) -> Result<Self> {
        let k = s.len().max(1) as i64;
        Pole::weighted(b, s, &vec![Ratio::new(1, k); s.len()])
    }

    pub fn from_spec(b: &Building, spec: &PoleSpec) -> Result<Self> {
        match spec {
            PoleSpec::Vertex { vertex } => {
                if !b.complex().contains(&Simplex::vertex(*vertex)) {
                    return Err(Error::input(format!("no vertex {vertex}")));
                }
                Pole::vertex(b, *vertex)
            }
            PoleSpec::Barycenter { barycenter } => {
                let s = Simplex::new(barycenter.iter().copied());
                if s.len() != barycenter.len() {
                    return Err(Error::input("repeated vertex in barycenter"));
                }
                Pole::barycenter(b, &s)
            }
            PoleSpec::Weighted { vertices, weights } => {
                if vertices.len() != weights.len() {
                    return Err(Error::input("one weight per vertex required"));
                }
                let mut pairs: Vec<(VertexId, Ratio<i64>)> = vertices
                    .iter()
                    .zip(weights)
                    .map(|(v, w)| Ok((*v, parse_ratio(w)?)))
                    .collect::<Result<_>>()?;
                pairs.sort();
                pairs.dedup_by_key(|p| p.0);
                if pairs.len() != vertices.len() {
                    return Err(Error::input("repeated vertex in pole"));
                }
                let s = Simplex::new(pairs.iter().map(|p| p.0));
                let w: Vec<Ratio<i64>> = pairs.iter().map(|p| p.1).collect();
                Pole::weighted(b, &s, &w)
            }
            PoleSpec::Frame { frame, carrier, weights } => {
                if frame.len() != b.factors().len() {
                    return Err(Error::input("one frame per factor required"));
                }
                let mut frames = Vec::new();
                for (f, vecs) in frame.iter().enumerate() {
                    let m = b.factors()[f].n() + 1;
                    let p = b.factors()[f].field().order() as u8;
                    if vecs.iter().any(|v| v.len() != m || v.iter().any(|x| *x >= p)) {
                        return Err(Error::input(format!("frame of factor {f}: vectors must have {m} entries below {p}")));
                    }
                    frames.push(
                        b.frame_from_vectors(f, vecs)
                            .ok_or_else(|| Error::input(format!("frame of factor {f} has a zero vector")))?,
                    );
                }
                let chart = b.chart_from_frames(&frames)?;
                if carrier.len() != weights.len() {
                    return Err(Error::input("one weight per carrier entry required"));
                }
                let mut pairs = Vec::new();
                for (entry, w) in carrier.iter().zip(weights) {
                    let (f, elems) = match entry {
                        CarrierEntry::Subset(s) => {
                            if b.factors().len() != 1 {
                                return Err(Error::input("joins need {factor, subset} carrier entries"));
                            }
                            (0, s)
                        }
                        CarrierEntry::Factored { factor, subset } => (*factor, subset),
                    };
                    if f >= b.factors().len() {
                        return Err(Error::input(format!("no factor {f}")));
                    }
                    let s = subset_from_elements(elems)?;
                    let v = b
                        .coxeter()
                        .vertex(f, s)
                        .ok_or_else(|| Error::input(format!("{elems:?} is not a proper nonempty subset")))?;
                    pairs.push((v, parse_ratio(w)?));
                }
                pairs.sort();
                let s = Simplex::new(pairs.iter().map(|p| p.0));
                if s.len() != pairs.len() {
                    return Err(Error::input("repeated carrier entry"));
                }
                let w: Vec<Ratio<i64>> = pairs.iter().map(|p| p.1).collect();
                Pole::new(b, chart, &s, &w)
            }
        }
    }

    /// Chart chambers (in the Coxeter model) whose closure contains the pole.
    pub fn coxeter_chambers(&self, b: &Building) -> Vec<Simplex> {
        b.coxeter()
            .complex()
            .facets_containing(&self.point.carrier)
            .into_iter()
            .cloned()
            .collect()
    }

    /// The canonical centre chamber: the first chart chamber containing the carrier.
    pub fn chamber(&self, b: &Building) -> Simplex {
        let c = self.coxeter_chambers(b).into_iter().next().expect("carrier lies in a chamber");
        self.chart.to_building(&c)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Class {
    /// closer than the threshold (`d < π/2` for hemispheres)
    LT,
    EQ,
    GT,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexClassification {
    pub classes: BTreeMap<VertexId, Class>,
    pub antipodal: BTreeSet<VertexId>,
}

impl VertexClassification {
    pub fn class(&self, v: VertexId) -> Option<Class> {
        self.classes.get(&v).copied()
    }

    pub fn is(&self, v: VertexId, c: Class) -> bool {
        self.class(v) == Some(c)
    }

    pub fn vertices_of(&self, c: Class) -> BTreeSet<VertexId> {
        self.classes.iter().filter(|(_, k)| **k == c).map(|(v, _)| *v).collect()
    }

    pub fn count(&self, c: Class) -> usize {
        self.classes.values().filter(|k| **k == c).count()
    }

    /// Restriction to a vertex set (classes of vertices outside the map are dropped).
    pub fn restrict(&self, keep: &BTreeSet<VertexId>) -> Self {
        VertexClassification {
            classes: self
                .classes
                .iter()
                .filter(|(v, _)| keep.contains(v))
                .map(|(v, c)| (*v, *c))
                .collect(),
            antipodal: self.antipodal.intersection(keep).copied().collect(),
        }
    }
}

fn class_of(point: &RationalPoint, target: &[i64], t: Ratio<i64>) -> Class {
    match cmp_cos_threshold_vec(&point.coords, target, t) {
        Ordering::Greater => Class::LT,
        Ordering::Equal => Class::EQ,
        Ordering::Less => Class::GT,
    }
}

/// Retracted Coxeter vertex of `v` for the centre chamber `c` and source chamber `d ∋ v`.
fn retracted(b: &Building, pole: &Pole, c: &Simplex, d: &Simplex, v: VertexId) -> Result<VertexId> {
    let s = b.retract_to_coxeter_via(&pole.chart, c, d, &Simplex::vertex(v))?;
    Ok(s.vertices()[0])
}

fn classify_with(b: &Building, pole: &Pole, t: Ratio<i64>) -> Result<VertexClassification> {
    if t.numer().abs() >= *t.denom() {
        return Err(Error::input(format!("threshold {t} must lie strictly between -1 and 1")));
    }
    let c = pole.chamber(b);
    let verts: Vec<VertexId> = b.complex().vertex_ids().collect();
    let rows: Vec<(VertexId, Class, bool)> = verts
        .par_iter()
        .map(|&v| {
            let d = b.chamber_containing(&Simplex::vertex(v))?;
            let u = b.coxeter().vector(retracted(b, pole, &c, &d, v)?);
            Ok((v, class_of(&pole.point, &u, t), antipodal_vec(&pole.point.coords, &u)))
        })
        .collect::<Result<_>>()?;
    let mut out = VertexClassification::default();
    for (v, c, a) in rows {
        out.classes.insert(v, c);
        if a {
            out.antipodal.insert(v);
        }
    }
    Ok(out)
}

/// Every vertex against `d(x, v) = π/2`.
pub fn classify(b: &Building, pole: &Pole) -> Result<VertexClassification> {
    classify_with(b, pole, Ratio::from_integer(0))
}

/// Every vertex against `cos d(x, v) = t`; `LT` means `cos d > t` (inside the ball).
pub fn classify_cap(b: &Building, pole: &Pole, t: Ratio<i64>) -> Result<VertexClassification> {
    classify_with(b, pole, t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Disagreement {
    pub vertex: VertexId,
    pub centre: Simplex,
    pub source: Simplex,
    pub expected: Class,
    pub found: Class,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WellposednessReport {
    pub vertices_checked: usize,
    pub choices_checked: usize,
    pub disagreements: Vec<Disagreement>,
}

impl WellposednessReport {
    pub fn passed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Recomputes the classification under every admissible pair (source chamber `D ∋ v`,
/// centre chamber `C ⊇ carrier(x)`) and lists all disagreements. With `sample = Some((k, seed))`
/// only `k` seeded-random vertices are audited.
pub fn wellposedness_audit(b: &Building, pole: &Pole, sample: Option<(usize, u64)>) -> Result<WellposednessReport> {
    let reference = classify(b, pole)?;
    let mut verts: Vec<VertexId> = b.complex().vertex_ids().collect();
    if let Some((k, seed)) = sample {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        verts.shuffle(&mut rng);
        verts.truncate(k);
        verts.sort_unstable();
    }
    let centres: Vec<Simplex> = pole
        .coxeter_chambers(b)
        .iter()
        .map(|c| pole.chart.to_building(c))
        .collect();
    let zero = Ratio::from_integer(0);
    let per_vertex: Vec<(usize, Vec<Disagreement>)> = verts
        .par_iter()
        .map(|&v| {
            let expected = reference.class(v).expect("classified");
            let mut n = 0;
            let mut bad = Vec::new();
            for d in b.complex().facets_containing(&Simplex::vertex(v)) {
                for c in &centres {
                    n += 1;
                    let u = b.coxeter().vector(retracted(b, pole, c, d, v)?);
                    let found = class_of(&pole.point, &u, zero);
                    if found != expected {
                        bad.push(Disagreement {
                            vertex: v,
                            centre: c.clone(),
                            source: d.clone(),
                            expected,
                            found,
                        });
                    }
                }
            }
            Ok((n, bad))
        })
        .collect::<Result<_>>()?;
    let mut report = WellposednessReport {
        vertices_checked: verts.len(),
        choices_checked: 0,
        disagreements: Vec::new(),
    };
    for (n, bad) in per_vertex {
        report.choices_checked += n;
        report.disagreements.extend(bad);
    }
    Ok(report)
}
