//! Supported subcomplexes `Λ(M)` for hemispheres, metric caps and roots, the `hor`/`ver` join
//! decomposition, and the classification induced on links of equator simplices.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::building::Building;
use crate::complex::{Simplex, SimplicialComplex, VertexId, VertexType};
use crate::coxeter::{dot, parse_ratio, Root};
use crate::error::{Error, Result};
use crate::metric::{classify, classify_cap, Class, Pole, PoleSpec, VertexClassification};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HemisphereKind {
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "=")]
    Eq,
}

/// Which of the two boundary conventions the removed convex set uses.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Removed {
    Open,
    Closed,
}

/// A root of the standard chart, `{x : x_i ≥ x_j}` in factor `factor` (indices 1-based).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSpec {
    #[serde(default)]
    pub factor: usize,
    pub i: usize,
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportSpec {
    Hemisphere { pole: PoleSpec, kind: HemisphereKind },
    /// Complement of the ball `cos d(x, ·) > t` (removed open) or `≥ t` (removed closed).
    CapComplement { pole: PoleSpec, threshold: String, removed: Removed },
    /// Complement of a root of a thin building.
    RootComplement { root: RootSpec, removed: Removed },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Exactness {
    Exact,
    /// Some simplex with all vertices in the support leaves it; the complex is the full
    /// subcomplex on the support's vertices, which over-approximates `Λ(M)`.
    VertexHullApproximation,
}

#[derive(Clone, Debug)]
pub struct SupportedSubcomplex {
    pub complex: SimplicialComplex,
    pub spec: SupportSpec,
    /// For roots: `LT` on the open removed side, `EQ` on the wall, `GT` beyond.
    pub classification: VertexClassification,
    pub exactness: Exactness,
    /// The support is closed and its complement convex, so Theorem-A style checks apply.
    pub closed_coconvex: bool,
    pub violations: Vec<Simplex>,
}

pub fn hemisphere_complex(x: &SimplicialComplex, classes: &VertexClassification, kind: HemisphereKind) -> SimplicialComplex {
    x.full_subcomplex_by(|v| match (kind, classes.class(v)) {
        (HemisphereKind::Gt, Some(Class::GT)) => true,
        (HemisphereKind::Ge, Some(Class::GT | Class::EQ)) => true,
        (HemisphereKind::Eq, Some(Class::EQ)) => true,
        _ => false,
    })
}

pub fn hemisphere(b: &Building, pole: &Pole, kind: HemisphereKind, spec: SupportSpec) -> Result<SupportedSubcomplex> {
    let classification = classify(b, pole)?;
    Ok(SupportedSubcomplex {
        complex: hemisphere_complex(b.complex(), &classification, kind),
        spec,
        classification,
        exactness: Exactness::Exact,
        closed_coconvex: kind == HemisphereKind::Ge,
        violations: Vec::new(),
    })
}

/// Largest `cos d(x, y)` over the closed realization of the simplex spanned by `vectors`,
/// reported as the finite candidate set: vertex values are exact via `vertex_cmp`, interior
/// maxima as squared positive values `⟨b, G⁻¹b⟩ / |x|²` (attained where the projection of
/// `x` to a face's span lies inside the face's cone).
fn interior_maxima(x: &[i64], vectors: &[Vec<i64>]) -> Vec<BigRational> {
    let k = vectors.len();
    let nx = BigRational::from_integer(BigInt::from(dot(x, x)));
    let mut out = Vec::new();
    for mask in 1u32..(1 << k) {
        if mask.count_ones() < 2 {
            continue;
        }
        let face: Vec<&Vec<i64>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &vectors[i]).collect();
        let m = face.len();
        let q = |a: i128| BigRational::from_integer(BigInt::from(a));
        // augmented Gram system [G | b]
        let mut a: Vec<Vec<BigRational>> = (0..m)
            .map(|r| {
                let mut row: Vec<BigRational> = (0..m).map(|c| q(dot(face[r], face[c]))).collect();
                row.push(q(dot(face[r], x)));
                row
            })
            .collect();
        let b: Vec<BigRational> = a.iter().map(|r| r[m].clone()).collect();
        let mut singular = false;
        for col in 0..m {
            let Some(p) = (col..m).find(|&r| !a[r][col].is_zero()) else {
                singular = true;
                break;
            };
            a.swap(col, p);
            let inv = a[col][col].recip();
            for c in col..=m {
                a[col][c] = &a[col][c] * &inv;
            }
            for r in 0..m {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for c in col..=m {
                        let t = &f * &a[col][c];
                        a[r][c] -= t;
                    }
                }
            }
        }
        if singular {
            continue;
        }
        let lambda: Vec<BigRational> = a.iter().map(|r| r[m].clone()).collect();
        if lambda.iter().all(|l| l.is_positive()) {
            let num: BigRational = lambda.iter().zip(&b).map(|(l, bi)| l * bi).fold(BigRational::zero(), |s, t| s + t);
            out.push(num / &nx);
        }
    }
    out
}

/// Whether the closed simplex stays in `{cos ≤ t}` (`removed = Open`) or `{cos < t}`.
fn simplex_inside(x: &[i64], vectors: &[Vec<i64>], t: Ratio<i64>, removed: Removed) -> bool {
    let ok = |o: Ordering| match removed {
        Removed::Open => o != Ordering::Greater,
        Removed::Closed => o == Ordering::Less,
    };
    if !vectors.iter().all(|u| ok(crate::coxeter::cmp_cos_threshold_vec(x, u, t))) {
        return false;
    }
    let tq = BigRational::new(BigInt::from(*t.numer()), BigInt::from(*t.denom()));
    let t2 = &tq * &tq;
    interior_maxima(x, vectors).into_iter().all(|c2| {
        // c2 = cos² with cos > 0
        if !tq.is_positive() {
            return false;
        }
        ok(c2.cmp(&t2))
    })
}

pub fn cap_complement(b: &Building, pole: &Pole, t: Ratio<i64>, removed: Removed, spec: SupportSpec) -> Result<SupportedSubcomplex> {
    let classification = classify_cap(b, pole, t)?;
    let candidate = b.complex().full_subcomplex_by(|v| match classification.class(v) {
        Some(Class::GT) => true,
        Some(Class::EQ) => removed == Removed::Open,
        _ => false,
    });
    let mut violations = Vec::new();
    if !t.is_zero() && !candidate.is_void() {
        let c = pole.chamber(b);
        let simplices: Vec<&Simplex> = candidate.simplices().iter().filter(|s| s.len() >= 2).collect();
        let bad: Vec<Option<Simplex>> = simplices
            .par_iter()
            .map(|s| {
                let r = b.retract_to_coxeter(&pole.chart, &c, s)?;
                let vecs: Vec<Vec<i64>> = r.vertices().iter().map(|v| b.coxeter().vector(*v)).collect();
                Ok((!simplex_inside(&pole.point.coords, &vecs, t, removed)).then(|| (*s).clone()))
            })
            .collect::<Result<_>>()?;
        violations = bad.into_iter().flatten().collect();
    }
    Ok(SupportedSubcomplex {
        complex: candidate,
        spec,
        classification,
        exactness: if violations.is_empty() { Exactness::Exact } else { Exactness::VertexHullApproximation },
        closed_coconvex: removed == Removed::Open && !t.is_negative(),
        violations,
    })
}

pub fn root_complement(b: &Building, root: RootSpec, removed: Removed, spec: SupportSpec) -> Result<SupportedSubcomplex> {
    if b.is_thick() || b.factors().iter().any(|f| !f.is_thin()) {
        return Err(Error::Unsupported("root complements are defined on thin buildings only".into()));
    }
    let ranks = b.ranks();
    if root.factor >= ranks.len() {
        return Err(Error::input(format!("no factor {}", root.factor)));
    }
    let n = ranks[root.factor];
    if root.i == 0 || root.j == 0 || root.i > n + 1 || root.j > n + 1 || root.i == root.j {
        return Err(Error::input(format!("root indices must be distinct in 1..={}", n + 1)));
    }
    let r = Root {
        factor: root.factor,
        i: root.i - 1,
        j: root.j - 1,
    };
    let chart = b.standard_chart();
    let mut classification = VertexClassification::default();
    for v in b.complex().vertex_ids() {
        let key = b.coxeter().key(chart.preimage_of(v).expect("thin building is one apartment"));
        let class = if r.on_wall(key) {
            Class::EQ
        } else if r.contains(key) {
            Class::LT
        } else {
            Class::GT
        };
        classification.classes.insert(v, class);
    }
    let complex = b.complex().full_subcomplex_by(|v| match classification.class(v) {
        Some(Class::GT) => true,
        Some(Class::EQ) => removed == Removed::Open,
        _ => false,
    });
    Ok(SupportedSubcomplex {
        complex,
        spec,
        classification,
        exactness: Exactness::Exact,
        closed_coconvex: removed == Removed::Open,
        violations: Vec::new(),
    })
}

pub fn support(b: &Building, spec: &SupportSpec) -> Result<SupportedSubcomplex> {
    match spec {
        SupportSpec::Hemisphere { pole, kind } => hemisphere(b, &Pole::from_spec(b, pole)?, *kind, spec.clone()),
        SupportSpec::CapComplement { pole, threshold, removed } => {
            let t = parse_ratio(threshold)?;
            cap_complement(b, &Pole::from_spec(b, pole)?, t, *removed, spec.clone())
        }
        SupportSpec::RootComplement { root, removed } => root_complement(b, *root, *removed, spec.clone()),
    }
}

/// Splits type runs at the given types (the components of a link).
pub fn split_components(components: &[BTreeSet<VertexType>], present: &BTreeSet<VertexType>) -> Vec<BTreeSet<VertexType>> {
    let mut out = Vec::new();
    for comp in components {
        let mut run = BTreeSet::new();
        let mut last: Option<VertexType> = None;
        for &t in comp {
            if present.contains(&t) || last.is_some_and(|l| l + 1 != t) {
                if !run.is_empty() {
                    out.push(std::mem::take(&mut run));
                }
            }
            if !present.contains(&t) {
                run.insert(t);
            }
            last = Some(t);
        }
        if !run.is_empty() {
            out.push(run);
        }
    }
    out
}

/// A chamber complex (the building, or a link in it) with a pole classification of its
/// vertices and the type sets of its irreducible join factors.
#[derive(Clone, Debug)]
pub struct Hemispheres {
    pub complex: SimplicialComplex,
    pub classes: VertexClassification,
    pub components: Vec<BTreeSet<VertexType>>,
}

#[derive(Clone, Debug)]
pub struct HorVer {
    pub hor_types: BTreeSet<VertexType>,
    /// `{∅}` when no factor lies in the equator.
    pub hor: SimplicialComplex,
    pub ver: SimplicialComplex,
}

impl Hemispheres {
    pub fn of_building(b: &Building, classes: VertexClassification) -> Self {
        Hemispheres {
            complex: b.complex().clone(),
            classes,
            components: b.type_components(),
        }
    }

    pub fn gt(&self) -> SimplicialComplex {
        hemisphere_complex(&self.complex, &self.classes, HemisphereKind::Gt)
    }

    pub fn ge(&self) -> SimplicialComplex {
        hemisphere_complex(&self.complex, &self.classes, HemisphereKind::Ge)
    }

    pub fn eq(&self) -> SimplicialComplex {
        hemisphere_complex(&self.complex, &self.classes, HemisphereKind::Eq)
    }

    pub fn is_eq(&self, v: VertexId) -> bool {
        self.classes.is(v, Class::EQ)
    }

    pub fn vtype(&self, v: VertexId) -> VertexType {
        self.complex.vtype(v).expect("vertex of the complex")
    }

    /// A factor is horizontal iff all of its vertices are equatorial.
    pub fn hor_types(&self) -> BTreeSet<VertexType> {
        let mut out = BTreeSet::new();
        for comp in &self.components {
            let mut verts = self.complex.vertex_ids().filter(|v| comp.contains(&self.vtype(*v))).peekable();
            if verts.peek().is_some() && verts.all(|v| self.is_eq(v)) {
                out.extend(comp.iter().copied());
            }
        }
        out
    }

    pub fn hor_ver(&self) -> HorVer {
        let hor_types = self.hor_types();
        let hor = self.complex.full_subcomplex_by(|v| hor_types.contains(&self.vtype(v)));
        let ver = self.complex.full_subcomplex_by(|v| !hor_types.contains(&self.vtype(v)));
        HorVer { hor_types, hor, ver }
    }

    /// `σ^=`: the face spanned by the equatorial vertices.
    pub fn sigma_eq(&self, s: &Simplex) -> Simplex {
        s.filter(|v| self.is_eq(v))
    }

    /// The link of an equator simplex with the induced pole: same trichotomy on the link's
    /// vertices, components split at the types of `σ`.
    pub fn link(&self, s: &Simplex) -> Result<Hemispheres> {
        if !self.complex.contains(s) {
            return Err(Error::NotMember(s.clone()));
        }
        if let Some(v) = s.vertices().iter().find(|v| !self.is_eq(**v)) {
            return Err(Error::precondition(format!("vertex {v} of {s:?} is not on the equator")));
        }
        let complex = self.complex.link(s)?;
        let classes = self.classes.restrict(&complex.vertex_set());
        let components = split_components(&self.components, &self.complex.types_of(s))
            .into_iter()
            .filter(|c| complex.vertex_ids().any(|v| c.contains(&self.vtype(v))))
            .collect();
        Ok(Hemispheres {
            complex,
            classes,
            components,
        })
    }

    /// Open hemisphere complex as the join of the factor-wise pieces of `Δ_ver`, and the
    /// equator as `Δ_ver^= ∗ Δ_hor`.
    pub fn join_law_holds(&self) -> Result<bool> {
        let hv = self.hor_ver();
        let mut gt = SimplicialComplex::empty(self.complex.typeset().clone());
        for comp in self.components.iter().filter(|c| !c.iter().any(|t| hv.hor_types.contains(t))) {
            let part = self
                .complex
                .full_subcomplex_by(|v| comp.contains(&self.vtype(v)) && self.classes.is(v, Class::GT));
            gt = gt.join(&part)?;
        }
        let eq_ver = hv.ver.full_subcomplex_by(|v| self.is_eq(v));
        let eq = eq_ver.join(&hv.hor)?;
        Ok(gt == self.gt() && eq == self.eq() && self.complex == hv.hor.join(&hv.ver)?)
    }
}

/// Classification of `lk σ` induced by the pole, for `σ` in the equator.
pub fn induced_link_classification(b: &Building, classes: &VertexClassification, s: &Simplex) -> Result<VertexClassification> {
    Ok(Hemispheres::of_building(b, classes.clone()).link(s)?.classes)
}

/// Reducibility through the metric: some chamber has two vertices at distance `π/2`.
pub fn reducible_by_metric(b: &Building) -> bool {
    let cox = b.coxeter();
    cox.complex().facets().iter().any(|c| {
        let vs = c.vertices();
        vs.iter()
            .enumerate()
            .any(|(i, a)| vs[i + 1..].iter().any(|bb| cox.scaled_inner(*a, *bb) == 0))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::building::BuildingSpec;
    use crate::homology::reduced_homology;

    fn fano() -> Building {
        Building::build_flag(2, 2).unwrap()
    }

    fn of_type(b: &Building, k: usize) -> Vec<VertexId> {
        b.complex().vertex_ids().filter(|v| b.local_type(*v) == k).collect()
    }

    fn flag_edge(b: &Building) -> Simplex {
        b.complex().facets()[0].clone()
    }

    fn hemis(b: &Building, x: &Pole) -> Hemispheres {
        Hemispheres::of_building(b, classify(b, x).unwrap())
    }

    #[test]
    fn fano_vertex_hemispheres() {
        let b = fano();
        let h = hemis(&b, &Pole::vertex(&b, 0).unwrap());
        let gt = h.gt();
        assert_eq!(gt.f_vector(), vec![10, 12]);
        assert_eq!(h.ge(), gt);
        assert!(h.eq().is_empty_complex());
        assert_eq!(reduced_homology(&gt).unwrap().betti(1), 3);
    }

    #[test]
    fn fano_midpoint_hemispheres() {
        let b = fano();
        let h = hemis(&b, &Pole::barycenter(&b, &flag_edge(&b)).unwrap());
        assert_eq!(h.eq().f_vector(), vec![4]);
        assert_eq!(h.gt().f_vector(), vec![8, 8]);
        assert_eq!(h.ge().f_vector(), vec![12, 16]);
        assert_eq!(reduced_homology(&h.gt()).unwrap().betti_vector(), vec![0, 1]);
        assert!(h.gt().is_subcomplex_of(&h.ge()) && h.eq().is_subcomplex_of(&h.ge()));
        assert!(h.gt().vertex_set().is_disjoint(&h.eq().vertex_set()));
    }

    #[test]
    fn hexagon_vertex_pole() {
        let b = Building::build(&BuildingSpec::thin(2)).unwrap();
        let h = hemis(&b, &Pole::vertex(&b, 0).unwrap());
        assert_eq!(h.gt().f_vector(), vec![3, 2]);
        assert_eq!(h.classes.count(Class::LT), 3);
    }

    #[test]
    fn caps_and_fullness() {
        let b = fano();
        let p = of_type(&b, 1)[0];
        let x = Pole::vertex(&b, p).unwrap();
        let spec = SupportSpec::CapComplement {
            pole: PoleSpec::Vertex { vertex: p },
            threshold: "1/2".into(),
            removed: Removed::Open,
        };
        let s = support(&b, &spec).unwrap();
        assert_eq!(s.complex.num_vertices(), 13);
        assert_eq!(s.complex.f_vector(), vec![13, 18]);
        assert_eq!(s.exactness, Exactness::Exact);
        assert!(s.closed_coconvex);
        let h = hemis(&b, &x);
        let zero_open = cap_complement(&b, &x, Ratio::from_integer(0), Removed::Open, spec.clone()).unwrap();
        assert_eq!(zero_open.complex, h.ge());
        let zero_closed = cap_complement(&b, &x, Ratio::from_integer(0), Removed::Closed, spec.clone()).unwrap();
        assert_eq!(zero_closed.complex, h.gt());
        // a wide ball: the far edges straddle the sphere of radius arccos(-1/2)
        let wide = cap_complement(&b, &x, Ratio::new(-1, 2), Removed::Closed, spec).unwrap();
        assert!(!wide.closed_coconvex);
        assert!(wide.complex.vertex_ids().all(|v| wide.classification.is(v, Class::GT)));
    }

    #[test]
    fn edge_midpoint_cap_detects_interior_maximum() {
        // both endpoints at angle π/3 from x, whose direction is their sum
        let x = vec![1, 1, -2];
        let u = vec![2, -1, -1];
        let w = vec![-1, 2, -1];
        assert!(simplex_inside(&x, &[u.clone()], Ratio::new(1, 2), Removed::Open));
        assert!(!simplex_inside(&x, &[u, w], Ratio::new(1, 2), Removed::Open));
    }

    #[test]
    fn roots() {
        let b = Building::build(&BuildingSpec::thin(2)).unwrap();
        let spec = SupportSpec::RootComplement {
            root: RootSpec { factor: 0, i: 1, j: 2 },
            removed: Removed::Open,
        };
        let s = support(&b, &spec).unwrap();
        // closed half of the hexagon: 4 vertices on a path
        assert_eq!(s.complex.f_vector(), vec![4, 3]);
        let open = root_complement(&b, RootSpec { factor: 0, i: 1, j: 2 }, Removed::Closed, spec).unwrap();
        assert_eq!(open.complex.f_vector(), vec![2, 1]);
        assert!(support(
            &fano(),
            &SupportSpec::RootComplement {
                root: RootSpec { factor: 0, i: 1, j: 2 },
                removed: Removed::Open
            }
        )
        .is_err());
    }

    #[test]
    fn hor_ver_irreducible_and_join() {
        let b = fano();
        let h = hemis(&b, &Pole::vertex(&b, 3).unwrap());
        let hv = h.hor_ver();
        assert!(hv.hor.is_empty_complex());
        assert_eq!(hv.ver, *b.complex());
        assert!(h.join_law_holds().unwrap());

        let spec: BuildingSpec = serde_json::from_str(r#"{"join":[{"thin":{"family":"A","n":1}},{"family":"A","n":2,"q":2}]}"#).unwrap();
        let j = Building::build(&spec).unwrap();
        let s0: Vec<VertexId> = j.complex().vertex_ids().filter(|v| j.factor_of(*v) == 0).collect();
        let h = hemis(&j, &Pole::vertex(&j, s0[0]).unwrap());
        let hv = h.hor_ver();
        assert_eq!(hv.ver.num_vertices(), 2);
        assert_eq!(hv.hor.f_vector(), vec![14, 21]);
        assert_eq!(h.gt().f_vector(), vec![1]);
        assert!(h.join_law_holds().unwrap());
        assert!(reducible_by_metric(&j) && !reducible_by_metric(&b));
        // a pole in neither factor
        let edge = j.complex().facets()[5].clone();
        let h = hemis(&j, &Pole::barycenter(&j, &edge).unwrap());
        assert!(h.hor_ver().hor.is_empty_complex());
        assert!(h.join_law_holds().unwrap());
    }

    #[test]
    fn induced_link() {
        let b = fano();
        let x = Pole::barycenter(&b, &flag_edge(&b)).unwrap();
        let c = classify(&b, &x).unwrap();
        let q = *c.vertices_of(Class::EQ).iter().next().unwrap();
        let lc = induced_link_classification(&b, &c, &Simplex::vertex(q)).unwrap();
        assert_eq!(lc.classes.len(), 3);
        for (v, k) in &lc.classes {
            assert_eq!(c.class(*v), Some(*k));
        }
        assert_eq!(induced_link_classification(&b, &c, &Simplex::empty()).unwrap(), c);
        let lt = *c.vertices_of(Class::LT).iter().next().unwrap();
        assert!(induced_link_classification(&b, &c, &Simplex::vertex(lt)).is_err());
    }

    #[test]
    fn open_hemispheres_are_full_dimensional() {
        let b = fano();
        let mut poles: Vec<Simplex> = b.complex().vertex_ids().map(Simplex::vertex).collect();
        poles.extend(b.complex().facets().iter().cloned());
        for s in poles {
            let h = hemis(&b, &Pole::barycenter(&b, &s).unwrap());
            assert_eq!(h.gt().dim(), 1);
        }
    }

    #[test]
    fn closed_chamber_in_each_meeting_apartment() {
        let b = fano();
        let h = hemis(&b, &Pole::barycenter(&b, &flag_edge(&b)).unwrap());
        let ge = h.ge().vertex_set();
        for chart in b.enumerate_apartments().unwrap() {
            let ap = b.apartment_complex(&chart);
            if ap.vertex_ids().any(|v| ge.contains(&v)) {
                assert!(ap.facets().iter().any(|c| c.vertices().iter().all(|v| ge.contains(v))));
            }
        }
    }

    #[test]
    fn split() {
        let comps = vec![BTreeSet::from([1, 2, 3, 4]), BTreeSet::from([5])];
        assert_eq!(
            split_components(&comps, &BTreeSet::from([2])),
            vec![BTreeSet::from([1]), BTreeSet::from([3, 4]), BTreeSet::from([5])]
        );
        assert_eq!(split_components(&comps, &BTreeSet::from([5])), vec![BTreeSet::from([1, 2, 3, 4])]);
    }
}
