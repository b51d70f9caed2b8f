//! The `(Δ,x)`-restriction, the order `⪯` on its image, heights, and the filtration
//! `Δ^>(x) ∗ Δ_hor(x) = F_0 ⊆ F_1 ⊆ … ⊆ F_N = Δ^≥(x)`.

pub mod cones;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::Tally;
use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::metric::Class;
use crate::supports::{HorVer, Hemispheres};

/// `restr(σ)` for an equatorial simplex: keep `v` iff some chamber `C ⊇ σ` has a panel
/// `C ∖ v` with a non-equatorial vertex in its link.
pub fn restrict_equatorial(h: &Hemispheres, s: &Simplex) -> Simplex {
    if s.is_empty() {
        return Simplex::empty();
    }
    let chambers = h.complex.facets_containing(s);
    s.filter(|v| {
        chambers.iter().any(|c| {
            let panel = c.without(v);
            h.complex
                .facets_containing(&panel)
                .iter()
                .any(|d| d.difference(&panel).vertices().iter().any(|w| !h.is_eq(*w)))
        })
    })
}

/// `restr(σ)` for any simplex of `Δ^≥`.
pub fn restriction(h: &Hemispheres, s: &Simplex) -> Result<Simplex> {
    require_ge(h, s)?;
    Ok(restrict_equatorial(h, &h.sigma_eq(s)))
}

fn require_ge(h: &Hemispheres, s: &Simplex) -> Result<()> {
    if !h.complex.contains(s) {
        return Err(Error::NotMember(s.clone()));
    }
    if let Some(v) = s.vertices().iter().find(|v| h.classes.is(**v, Class::LT)) {
        return Err(Error::precondition(format!("vertex {v} of {s:?} is not in the closed hemisphere")));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FiltrationStage {
    pub k: usize,
    #[serde(skip)]
    pub complex: Option<SimplicialComplex>,
    pub f_vector: Vec<usize>,
    /// `I_k`: image simplices of height `k`.
    pub new_centres: Vec<Simplex>,
    /// Simplices of height `≤ k` form a subcomplex.
    pub closed: bool,
}

impl FiltrationStage {
    pub fn complex(&self) -> &SimplicialComplex {
        self.complex.as_ref().expect("stage complex present")
    }
}

#[derive(Clone, Debug)]
pub struct Filtration {
    h: Hemispheres,
    ge: SimplicialComplex,
    eq: SimplicialComplex,
    hv: HorVer,
    restr: BTreeMap<Simplex, Simplex>,
    image: BTreeSet<Simplex>,
    order: BTreeSet<(Simplex, Simplex)>,
    heights: BTreeMap<Simplex, usize>,
    rank: usize,
}

impl Filtration {
    pub fn new(h: Hemispheres) -> Result<Self> {
        let ge = h.ge();
        let eq = h.eq();
        let hv = h.hor_ver();
        let restr: BTreeMap<Simplex, Simplex> = eq
            .simplices()
            .par_iter()
            .map(|s| (s.clone(), restrict_equatorial(&h, s)))
            .collect();
        let image: BTreeSet<Simplex> = restr.values().cloned().collect();
        let mut order = BTreeSet::new();
        for a in &image {
            for b in &image {
                let u = a.union(b);
                if restr.get(&u) == Some(b) {
                    order.insert((a.clone(), b.clone()));
                }
            }
        }
        let rank = eq
            .simplices()
            .iter()
            .filter(|s| h.complex.types_of(s).is_disjoint(&hv.hor_types))
            .map(|s| s.len())
            .max()
            .unwrap_or(0);
        let mut f = Filtration {
            h,
            ge,
            eq,
            hv,
            restr,
            image,
            order,
            heights: BTreeMap::new(),
            rank,
        };
        f.heights = f.compute_heights()?;
        Ok(f)
    }

    fn strictly_below(&self, a: &Simplex, b: &Simplex) -> bool {
        self.order.contains(&(a.clone(), b.clone())) && !self.order.contains(&(b.clone(), a.clone()))
    }

    fn compute_heights(&self) -> Result<BTreeMap<Simplex, usize>> {
        // longest chain ending at each element, by memoised depth-first search
        let elems: Vec<&Simplex> = self.image.iter().collect();
        let idx: HashMap<&Simplex, usize> = elems.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let below: Vec<Vec<usize>> = elems
            .iter()
            .map(|b| elems.iter().filter(|a| self.strictly_below(a, b)).map(|a| idx[a]).collect())
            .collect();
        #[derive(Clone, Copy)]
        enum State {
            New,
            Active,
            Done(usize),
        }
        let mut state = vec![State::New; elems.len()];
        fn visit(i: usize, below: &[Vec<usize>], state: &mut [State]) -> Result<usize> {
            match state[i] {
                State::Done(h) => return Ok(h),
                State::Active => return Err(Error::precondition("the order on the restriction image has a cycle")),
                State::New => {}
            }
            state[i] = State::Active;
            let mut h = 0;
            for &j in &below[i] {
                h = h.max(visit(j, below, state)? + 1);
            }
            state[i] = State::Done(h);
            Ok(h)
        }
        let mut out = BTreeMap::new();
        for (i, s) in elems.iter().enumerate() {
            out.insert((*s).clone(), visit(i, &below, &mut state)?);
        }
        Ok(out)
    }

    pub fn hemispheres(&self) -> &Hemispheres {
        &self.h
    }

    pub fn ge(&self) -> &SimplicialComplex {
        &self.ge
    }

    pub fn eq(&self) -> &SimplicialComplex {
        &self.eq
    }

    pub fn hor_ver(&self) -> &HorVer {
        &self.hv
    }

    /// `N = rank Δ_ver^=(x)`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn image(&self) -> &BTreeSet<Simplex> {
        &self.image
    }

    pub fn order_pairs(&self) -> &BTreeSet<(Simplex, Simplex)> {
        &self.order
    }

    pub fn sigma_eq(&self, s: &Simplex) -> Simplex {
        self.h.sigma_eq(s)
    }

    pub fn restriction(&self, s: &Simplex) -> Result<Simplex> {
        require_ge(&self.h, s)?;
        Ok(self.restr[&self.sigma_eq(s)].clone())
    }

    fn restr_unchecked(&self, s: &Simplex) -> &Simplex {
        &self.restr[&self.sigma_eq(s)]
    }

    fn require_image(&self, s: &Simplex) -> Result<()> {
        if self.image.contains(s) {
            Ok(())
        } else {
            Err(Error::precondition(format!("{s:?} is not in the restriction image")))
        }
    }

    pub fn preceq(&self, a: &Simplex, b: &Simplex) -> Result<bool> {
        self.require_image(a)?;
        self.require_image(b)?;
        Ok(self.order.contains(&(a.clone(), b.clone())))
    }

    pub fn height(&self, s: &Simplex) -> Result<usize> {
        Ok(self.heights[&self.restriction(s)?])
    }

    fn height_unchecked(&self, s: &Simplex) -> usize {
        self.heights[self.restr_unchecked(s)]
    }

    pub fn max_height(&self) -> usize {
        self.heights.values().copied().max().unwrap_or(0)
    }

    pub fn stage(&self, k: usize) -> FiltrationStage {
        let listed: Vec<Simplex> = self
            .ge
            .simplices()
            .iter()
            .filter(|s| self.height_unchecked(s) <= k)
            .cloned()
            .collect();
        let count = listed.len();
        let complex = self.ge.generated(listed);
        let closed = complex.num_simplices() == count;
        FiltrationStage {
            k,
            f_vector: complex.f_vector(),
            complex: Some(complex),
            new_centres: self.heights.iter().filter(|(_, h)| **h == k).map(|(s, _)| s.clone()).collect(),
            closed,
        }
    }

    pub fn stages(&self) -> Vec<FiltrationStage> {
        (0..=self.rank.max(self.max_height())).map(|k| self.stage(k)).collect()
    }

    /// The restriction preimage of an image simplex.
    pub fn relative_star(&self, s: &Simplex) -> Result<Vec<Simplex>> {
        self.require_image(s)?;
        Ok(self
            .ge
            .simplices()
            .iter()
            .filter(|t| self.restr_unchecked(t) == s)
            .cloned()
            .collect())
    }

    /// `lk_{F_k} σ` with `k = height(σ)`, read off the stage.
    pub fn relative_link(&self, s: &Simplex) -> Result<SimplicialComplex> {
        self.require_image(s)?;
        self.stage(self.heights[s]).complex().link(s)
    }

    /// `(lk σ)^>(p_σx) ∗ (lk σ)_hor(p_σx)` from the induced classification.
    pub fn expected_relative_link(&self, s: &Simplex) -> Result<SimplicialComplex> {
        let l = self.h.link(s)?;
        l.gt().join(&l.hor_ver().hor)
    }

    pub fn check_idempotent(&self) -> Tally {
        let mut t = Tally::new();
        for s in self.ge.simplices() {
            let r = self.restr_unchecked(s);
            t.record(self.restr_unchecked(r) == r && r.is_face_of(&self.sigma_eq(s)), || {
                format!("restr∘restr ≠ restr at {s:?}")
            });
        }
        for r in &self.image {
            for face in r.faces() {
                t.record(self.restr_unchecked(&face) == &face, || format!("face {face:?} of image {r:?} not fixed"));
            }
            t.record(self.h.complex.types_of(r).is_disjoint(&self.hv.hor_types), || {
                format!("image simplex {r:?} meets the horizontal factor")
            });
        }
        t
    }

    /// `restr(σ) = ∅ ⇔ σ^= ∈ Δ_hor`.
    pub fn check_empty_criterion(&self) -> Tally {
        let mut t = Tally::new();
        for s in self.eq.simplices() {
            let in_hor = self.h.complex.types_of(s).is_subset(&self.hv.hor_types);
            t.record(self.restr[s].is_empty() == in_hor, || format!("empty criterion fails at {s:?}"));
        }
        t
    }

    fn link_contexts(&self) -> Result<BTreeMap<Simplex, Hemispheres>> {
        self.eq
            .simplices()
            .par_iter()
            .map(|s| Ok((s.clone(), self.h.link(s)?)))
            .collect()
    }

    /// Restriction commutes with passing to links of equator faces, and `restr(τ) ∩ σ` is a
    /// face of `restr(σ)`.
    pub fn check_link_lemma(&self) -> Result<Tally> {
        let links = self.link_contexts()?;
        let mut t = Tally::new();
        for tau in self.eq.simplices() {
            for sigma in tau.faces() {
                let lh = &links[&sigma];
                let lhs = restrict_equatorial(lh, &tau.difference(&sigma));
                let rhs = self.restr[tau].difference(&sigma);
                t.record(lhs == rhs, || format!("link restriction at σ={sigma:?}, τ={tau:?}: {lhs:?} vs {rhs:?}"));
                let meet = self.restr[tau].intersection(&sigma);
                t.record(meet.is_face_of(&self.restr[&sigma]), || {
                    format!("restr({tau:?}) ∩ {sigma:?} not a face of restr({sigma:?})")
                });
            }
        }
        Ok(t)
    }

    /// For `σ ≤ τ^=`: `(τ∖σ)^= ∈ (lk σ)_hor ⇔ restr(τ) ≤ σ ⇔ restr(τ) = restr(σ)`.
    pub fn check_equal_restriction(&self) -> Result<Tally> {
        let links = self.link_contexts()?;
        let hor: BTreeMap<&Simplex, BTreeSet<u32>> = links.iter().map(|(s, l)| (s, l.hor_types())).collect();
        let mut t = Tally::new();
        for tau in self.ge.simplices() {
            let te = self.sigma_eq(tau);
            let rt = self.restr_unchecked(tau);
            for sigma in te.faces() {
                let a = self.h.complex.types_of(&te.difference(&sigma)).is_subset(&hor[&sigma]);
                let b = rt.is_face_of(&sigma);
                let c = rt == &self.restr[&sigma];
                t.record(a == b && b == c, || format!("σ={sigma:?}, τ={tau:?}: a={a} b={b} c={c}"));
            }
        }
        Ok(t)
    }

    /// `restr(σ) ⪯ τ ⇒ σ ∪ τ ∈ Δ and restr(σ ∪ τ) = τ`.
    pub fn check_order_lemma(&self) -> Tally {
        let mut t = Tally::new();
        for s in self.eq.simplices() {
            for tau in &self.image {
                if self.order.contains(&(self.restr[s].clone(), tau.clone())) {
                    let u = s.union(tau);
                    t.record(self.restr.get(&u) == Some(tau), || format!("order lemma fails for σ={s:?}, τ={tau:?}"));
                }
            }
        }
        t
    }

    pub fn check_poset(&self) -> Tally {
        let mut t = Tally::new();
        let empty = Simplex::empty();
        for a in &self.image {
            t.record(self.order.contains(&(a.clone(), a.clone())), || format!("{a:?} ⋠ itself"));
            t.record(self.order.contains(&(empty.clone(), a.clone())), || format!("∅ ⋠ {a:?}"));
            t.record(self.heights[a] <= self.rank, || format!("height of {a:?} exceeds rank"));
            for b in &self.image {
                if a != b && self.order.contains(&(a.clone(), b.clone())) {
                    t.record(!self.order.contains(&(b.clone(), a.clone())), || format!("{a:?} ⪯ {b:?} ⪯ {a:?}"));
                    for c in &self.image {
                        if self.order.contains(&(b.clone(), c.clone())) {
                            t.record(self.order.contains(&(a.clone(), c.clone())), || {
                                format!("{a:?} ⪯ {b:?} ⪯ {c:?} but not {a:?} ⪯ {c:?}")
                            });
                        }
                    }
                }
            }
        }
        t.record(self.heights.get(&empty) == Some(&0), || "height(∅) ≠ 0".into());
        t
    }

    pub fn check_faceheight(&self) -> Tally {
        let mut t = Tally::new();
        for tau in self.ge.simplices() {
            let ht = self.height_unchecked(tau);
            for s in tau.faces() {
                let hs = self.height_unchecked(&s);
                let same = self.restr_unchecked(&s) == self.restr_unchecked(tau);
                t.record(hs <= ht && ((hs == ht) == same), || format!("heights {hs} of {s:?} vs {ht} of {tau:?}"));
            }
        }
        t
    }

    /// `F_0 = Δ^> ∗ Δ_hor`, `F_N = Δ^≥`, every stage a subcomplex, `F_k ∖ F_{k−1}` the disjoint
    /// union of the relative stars over `I_k`, each equal to the open star in `F_k`, and the
    /// relative link identity.
    pub fn check_stages(&self) -> Result<Tally> {
        let mut t = Tally::new();
        let stages = self.stages();
        let f0 = self.h.gt().join(&self.hv.hor)?;
        t.record(*stages[0].complex() == f0, || "F_0 ≠ Δ^> ∗ Δ_hor".into());
        t.record(*stages[self.rank].complex() == self.ge, || "F_N ≠ Δ^≥".into());
        for st in &stages {
            t.record(st.closed, || format!("F_{} is not closed under faces", st.k));
        }
        for k in 1..stages.len() {
            let now: BTreeSet<&Simplex> = stages[k].complex().simplices().iter().collect();
            let before: BTreeSet<&Simplex> = stages[k - 1].complex().simplices().iter().collect();
            let fresh: BTreeSet<Simplex> = now.difference(&before).map(|s| (*s).clone()).collect();
            let mut union = BTreeSet::new();
            let mut disjoint = true;
            for s in &stages[k].new_centres {
                let rel = self.relative_star(s)?;
                let open: BTreeSet<Simplex> = stages[k].complex().open_star(s)?.into_iter().collect();
                let rel_set: BTreeSet<Simplex> = rel.iter().cloned().collect();
                t.record(rel_set == open, || format!("relative star of {s:?} ≠ open star in F_{k}"));
                for r in rel {
                    disjoint &= union.insert(r);
                }
            }
            t.record(disjoint && union == fresh, || format!("F_{k} ∖ F_{} is not the union of relative stars", k - 1));
        }
        for s in &self.image {
            let got = self.relative_link(s)?;
            let want = self.expected_relative_link(s)?;
            t.record(got == want, || format!("relative link of {s:?}: {:?} vs {:?}", got.facets(), want.facets()));
        }
        Ok(t)
    }

    /// All filtration suites together.
    pub fn check_all(&self) -> Result<Vec<(&'static str, Tally)>> {
        Ok(vec![
            ("restriction-idempotent", self.check_idempotent()),
            ("restriction-empty-criterion", self.check_empty_criterion()),
            ("restriction-link", self.check_link_lemma()?),
            ("restriction-equality-criterion", self.check_equal_restriction()?),
            ("order-lemma", self.check_order_lemma()),
            ("poset", self.check_poset()),
            ("height-monotone", self.check_faceheight()),
            ("stages", self.check_stages()?),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::building::Building;
    use crate::metric::{classify, Pole};

    fn filtration(b: &Building, x: &Pole) -> Filtration {
        Filtration::new(Hemispheres::of_building(b, classify(b, x).unwrap())).unwrap()
    }

    #[test]
    fn fano_midpoint() {
        let b = Building::build_flag(2, 2).unwrap();
        let edge = b.complex().facets()[3].clone();
        let f = filtration(&b, &Pole::barycenter(&b, &edge).unwrap());
        assert_eq!(f.rank(), 1);
        let eq: Vec<Simplex> = f.eq().facets().to_vec();
        assert_eq!(eq.len(), 4);
        for q in &eq {
            assert_eq!(f.restriction(q).unwrap(), *q);
            assert_eq!(f.height(q).unwrap(), 1);
            assert!(f.preceq(&Simplex::empty(), q).unwrap());
        }
        assert_eq!(f.height(&Simplex::empty()).unwrap(), 0);
        assert_eq!(f.image().len(), 5);
        let stages = f.stages();
        assert_eq!(stages.len(), 2);
        assert_eq!(*stages[0].complex(), f.hemispheres().gt());
        assert_eq!(*stages[1].complex(), *f.ge());
        assert_eq!(stages[1].new_centres.len(), 4);
        for (name, t) in f.check_all().unwrap() {
            assert!(t.passed(), "{name}: {:?}", t.witnesses);
            assert!(t.instances > 0, "{name}");
        }
        // σ^= of a mixed edge
        let q = eq[0].vertices()[0];
        let mixed = f
            .ge()
            .facets()
            .iter()
            .find(|e| e.contains_vertex(q))
            .unwrap()
            .clone();
        assert_eq!(f.sigma_eq(&mixed), Simplex::vertex(q));
        let lt = *f.hemispheres().classes.vertices_of(Class::LT).iter().next().unwrap();
        assert!(f.restriction(&Simplex::vertex(lt)).is_err());
    }

    #[test]
    fn fano_vertex_pole_is_trivial() {
        let b = Building::build_flag(2, 2).unwrap();
        let f = filtration(&b, &Pole::vertex(&b, 2).unwrap());
        assert_eq!(f.rank(), 0);
        assert_eq!(f.stages().len(), 1);
        assert_eq!(*f.stage(0).complex(), *f.ge());
        for (name, t) in f.check_all().unwrap() {
            assert!(t.passed(), "{name}");
        }
    }

    #[test]
    fn dimension_two_suites() {
        let b = Building::build_flag(3, 2).unwrap();
        let chamber = b.complex().facets()[40].clone();
        let pt = chamber.filter(|v| b.local_type(v) != 2);
        for s in [pt, chamber.filter(|v| b.local_type(v) == 2), chamber.clone()] {
            let f = filtration(&b, &Pole::barycenter(&b, &s).unwrap());
            for (name, t) in f.check_all().unwrap() {
                assert!(t.passed(), "{name} {s:?}: {:?}", t.witnesses);
            }
        }
    }

    #[test]
    fn join_with_horizontal_factor() {
        let spec: crate::building::BuildingSpec =
            serde_json::from_str(r#"{"join":[{"family":"A","n":1,"q":2},{"family":"A","n":2,"q":2}]}"#).unwrap();
        let b = Building::build(&spec).unwrap();
        let v = b.complex().vertex_ids().find(|v| b.factor_of(*v) == 0).unwrap();
        let f = filtration(&b, &Pole::vertex(&b, v).unwrap());
        assert_eq!(f.hor_ver().hor.f_vector(), vec![14, 21]);
        assert_eq!(f.rank(), 0);
        assert_eq!(f.image().len(), 1);
        for (name, t) in f.check_all().unwrap() {
            assert!(t.passed(), "{name}: {:?}", t.witnesses);
        }
    }
}
