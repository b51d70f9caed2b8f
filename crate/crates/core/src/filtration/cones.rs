//! Geodesic cone subcomplexes `K''(σ,θ,τ) = conv(σ∪θ, proj_τ(σ∪θ))`, `K′ = K'' ∖ st σ`,
//! `K = K'' ∖ (st σ ∪ st τ)`, and the opposite / apartment constructions built on them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Filtration;
use crate::audit::Tally;
use crate::building::{ApartmentChart, Building, SearchRoute};
use crate::complex::{Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::homology::reduced_homology;
use crate::metric::{Class, Pole};
use crate::supports::Hemispheres;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConeVariant {
    #[serde(rename = "K''")]
    Full,
    #[serde(rename = "K'")]
    MinusStar,
    #[serde(rename = "K")]
    MinusBothStars,
}

#[derive(Clone, Debug)]
pub struct ConeComplex {
    pub sigma: Simplex,
    pub tau: Simplex,
    pub variant: ConeVariant,
    pub complex: SimplicialComplex,
}

/// `conv(a, c)` in the building, through a common apartment.
pub fn hull(b: &Building, a: &Simplex, c: &Simplex) -> Result<SimplicialComplex> {
    let chart = b.common_apartment(a, c)?;
    let ac = chart.to_coxeter(a).expect("chart contains a");
    let cc = chart.to_coxeter(c).expect("chart contains c");
    let h = b.coxeter().conv(&[ac, cc]);
    Ok(b.complex().generated(h.facets().iter().map(|f| chart.to_building(f)).collect()))
}

fn opposite_in(b: &Building, chart: &ApartmentChart, s: &Simplex) -> Simplex {
    let sc = chart.to_coxeter(s).expect("chart contains the simplex");
    chart.to_building(&b.coxeter().opposition(&sc))
}

fn trim(k: SimplicialComplex, sigma: &Simplex, tau: &Simplex, variant: ConeVariant) -> SimplicialComplex {
    match variant {
        ConeVariant::Full => k,
        ConeVariant::MinusStar => k.remove_open_stars(std::slice::from_ref(sigma)),
        ConeVariant::MinusBothStars => k.remove_open_stars(&[sigma.clone(), tau.clone()]),
    }
}

fn full_cone(b: &Building, sigma: &Simplex, theta: &Simplex, tau: &Simplex) -> Result<SimplicialComplex> {
    let lambda = sigma.union(theta);
    if !b.complex().contains(&lambda) {
        return Err(Error::precondition(format!("{theta:?} is not in the closed star of {sigma:?}")));
    }
    let p = b.proj(tau, &lambda)?;
    hull(b, &lambda, &p)
}

fn require_opposite(b: &Building, sigma: &Simplex, tau: &Simplex) -> Result<()> {
    if b.opposite(sigma, tau) {
        Ok(())
    } else {
        Err(Error::precondition(format!("{sigma:?} and {tau:?} are not opposite")))
    }
}

pub fn cone(b: &Building, sigma: &Simplex, theta: &Simplex, tau: &Simplex, variant: ConeVariant) -> Result<ConeComplex> {
    require_opposite(b, sigma, tau)?;
    let k = full_cone(b, sigma, theta, tau)?;
    Ok(ConeComplex {
        sigma: sigma.clone(),
        tau: tau.clone(),
        variant,
        complex: trim(k, sigma, tau, variant),
    })
}

/// `⋃_{θ ∈ simp(L)} K''(σ,θ,τ)`, then the requested stars removed. `L` lives in the closed star
/// of `σ` (typically a subcomplex of `lk σ`).
pub fn cone_over(b: &Building, sigma: &Simplex, l: &SimplicialComplex, tau: &Simplex, variant: ConeVariant) -> Result<ConeComplex> {
    require_opposite(b, sigma, tau)?;
    if l.is_void() {
        return Err(Error::precondition("cone over a void complex"));
    }
    let mut k = SimplicialComplex::void(b.complex().typeset().clone());
    for theta in l.simplices() {
        k = k.union(&full_cone(b, sigma, theta, tau)?);
    }
    Ok(ConeComplex {
        sigma: sigma.clone(),
        tau: tau.clone(),
        variant,
        complex: trim(k, sigma, tau, variant),
    })
}

/// `K* ∩ ∂st σ = ∂(σ∪θ) ∖ st σ` for all three variants.
pub fn boundary_lemma_holds(b: &Building, sigma: &Simplex, theta: &Simplex, tau: &Simplex) -> Result<bool> {
    let boundary = b.complex().boundary_of_star(sigma)?;
    let lambda = sigma.union(theta);
    let faces: Vec<Simplex> = lambda.faces().filter(|f| !sigma.is_face_of(f)).collect();
    let expected = b.complex().generated(faces);
    for variant in [ConeVariant::Full, ConeVariant::MinusStar, ConeVariant::MinusBothStars] {
        let k = cone(b, sigma, theta, tau, variant)?.complex;
        if k.intersection(&boundary) != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exhaustive boundary-lemma audit over `(σ, θ, τ)` with `σ` nonempty, `θ` in the closed star
/// and `τ` any opposite.
pub fn audit_boundary_lemma(b: &Building) -> Result<Tally> {
    let mut t = Tally::new();
    for sigma in b.complex().simplices().iter().filter(|s| !s.is_empty()) {
        let star = b.complex().star(sigma)?;
        for tau in b.opposites_of(sigma) {
            for theta in star.simplices() {
                let ok = boundary_lemma_holds(b, sigma, theta, &tau)?;
                t.record(ok, || format!("σ={sigma:?} θ={theta:?} τ={tau:?}"));
            }
        }
    }
    Ok(t)
}

/// `K′(σ,L,τ)` has the homology of a point and dimension `dim σ + dim L + 1`; `K(σ,L,τ)` and
/// `K ∩ ∂st σ` have equal homology.
pub fn cone_shape_holds(b: &Building, sigma: &Simplex, l: &SimplicialComplex, tau: &Simplex) -> Result<bool> {
    let kp = cone_over(b, sigma, l, tau, ConeVariant::MinusStar)?.complex;
    let hp = reduced_homology(&kp)?;
    let dim_ok = kp.dim() == sigma.dim() + l.dim() + 1;
    let k = cone_over(b, sigma, l, tau, ConeVariant::MinusBothStars)?.complex;
    let boundary = b.complex().boundary_of_star(sigma)?;
    let h_k = reduced_homology(&k)?;
    let h_kb = reduced_homology(&k.intersection(&boundary))?;
    let top = h_k.complex_dim.max(h_kb.complex_dim);
    let same = (-1..=top).all(|d| h_k.betti(d) == h_kb.betti(d) && h_k.torsion(d) == h_kb.torsion(d));
    Ok(hp.is_acyclic() && dim_ok && same)
}

/// `K''(σ,L,τ) ∩ Δ^= ⊆ closure of st σ`.
pub fn equator_inside_star(b: &Building, h: &Hemispheres, sigma: &Simplex, l: &SimplicialComplex, tau: &Simplex) -> Result<bool> {
    let k = cone_over(b, sigma, l, tau, ConeVariant::Full)?.complex;
    Ok(k
        .simplices()
        .iter()
        .filter(|r| r.vertices().iter().all(|v| h.is_eq(*v)))
        .all(|r| b.complex().contains(&r.union(sigma))))
}

/// A simplex `θ` of `Δ^= ∩ (closure(σ∪L) ∖ st σ)` with `proj_θ τ` equatorial, if any.
pub fn proj_condition_witness(b: &Building, h: &Hemispheres, sigma: &Simplex, l: &SimplicialComplex, tau: &Simplex) -> Result<Option<Simplex>> {
    let mut seen = BTreeSet::new();
    for theta in l.simplices() {
        for face in sigma.union(theta).faces() {
            if sigma.is_face_of(&face) || !face.vertices().iter().all(|v| h.is_eq(*v)) || !seen.insert(face.clone()) {
                continue;
            }
            let p = b.proj(&face, tau)?;
            if p.vertices().iter().all(|v| h.is_eq(*v)) {
                return Ok(Some(face));
            }
        }
    }
    Ok(None)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OppositeRoute {
    /// Opposite of `σ` in an apartment `Σ′` with `Σ ∩ Σ′ = closure of st_Σ σ`.
    Constructive,
    /// First suitable opposite in a scan of all opposites.
    Scan,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GoodOpposite {
    pub tau: Simplex,
    pub route: OppositeRoute,
    pub search: Option<SearchRoute>,
}

/// An opposite `τ` of `σ` with `K''(σ,L,τ) ∩ Δ^= ⊆ closure of st σ`. `sigma_chart` must contain
/// the pole and `σ`; by default a common apartment of the pole's carrier and `σ`.
pub fn find_good_opposite(
    b: &Building,
    h: &Hemispheres,
    pole: &Pole,
    sigma: &Simplex,
    l: &SimplicialComplex,
    sigma_chart: Option<&ApartmentChart>,
    seed: u64,
) -> Result<GoodOpposite> {
    if sigma.is_empty() {
        return Err(Error::precondition("σ must be nonempty"));
    }
    let chart = match sigma_chart {
        Some(c) => c.clone(),
        None => b.common_apartment(&pole.carrier, sigma)?,
    };
    let apartment = b.apartment_complex(&chart);
    let target = apartment.star(sigma)?;
    match b.find_apartment_with_intersection(&chart, &target, seed) {
        Ok((other, search)) => {
            let tau = opposite_in(b, &other, sigma);
            if equator_inside_star(b, h, sigma, l, &tau)? {
                return Ok(GoodOpposite {
                    tau,
                    route: OppositeRoute::Constructive,
                    search: Some(search),
                });
            }
        }
        Err(Error::NotFound(_)) => {}
        Err(e) => return Err(e),
    }
    for tau in b.opposites_of(sigma) {
        if equator_inside_star(b, h, sigma, l, &tau)? {
            return Ok(GoodOpposite {
                tau,
                route: OppositeRoute::Scan,
                search: None,
            });
        }
    }
    Err(Error::NotFound(format!("no opposite of {sigma:?} keeps the cone's equator inside the star")))
}

/// Every opposite of `σ` either passes the containment or has a projection witness.
pub fn audit_proj_condition(b: &Building, h: &Hemispheres, sigma: &Simplex, l: &SimplicialComplex) -> Result<Tally> {
    let mut t = Tally::new();
    for tau in b.opposites_of(sigma) {
        let ok = equator_inside_star(b, h, sigma, l, &tau)? || proj_condition_witness(b, h, sigma, l, &tau)?.is_some();
        t.record(ok, || format!("σ={sigma:?} τ={tau:?}: containment fails without witness"));
    }
    Ok(t)
}

/// `K''(σ,L,τ) ⊆ Δ^≥` for `σ` equatorial and `L = lk_{Δ^≥} σ`, over all opposites.
pub fn audit_cone_in_south(b: &Building, h: &Hemispheres, sigma: &Simplex) -> Result<Tally> {
    let ge = h.ge();
    let l = ge.link(sigma)?;
    let mut t = Tally::new();
    for tau in b.opposites_of(sigma) {
        let k = cone_over(b, sigma, &l, &tau, ConeVariant::Full)?.complex;
        t.record(k.is_subcomplex_of(&ge), || format!("K''({sigma:?}, lk, {tau:?}) leaves Δ^≥"));
    }
    Ok(t)
}

/// `K'' ⊆ F_h` and `K′ = K'' ∩ F_{h−1}` whenever the equator part of `K''` stays in the star.
pub fn cone_in_filter_holds(f: &Filtration, b: &Building, sigma: &Simplex, l: &SimplicialComplex, tau: &Simplex) -> Result<bool> {
    let h = f.height(sigma)?;
    if h == 0 {
        return Err(Error::precondition("σ must have positive height"));
    }
    let full = cone_over(b, sigma, l, tau, ConeVariant::Full)?.complex;
    let minus = cone_over(b, sigma, l, tau, ConeVariant::MinusStar)?.complex;
    let fh = f.stage(h);
    let prev = f.stage(h - 1);
    Ok(full.is_subcomplex_of(fh.complex()) && minus == full.intersection(prev.complex()))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AntipodePair {
    pub y: crate::complex::VertexId,
    pub z1: crate::complex::VertexId,
    pub z2: crate::complex::VertexId,
    pub search1: SearchRoute,
    pub search2: SearchRoute,
    pub z1_class: Option<Class>,
    pub z2_class: Option<Class>,
    /// All opposites of `y` classified GT.
    pub gt_opposites: Vec<crate::complex::VertexId>,
}

impl AntipodePair {
    pub fn passed(&self) -> bool {
        self.z1 != self.z2 && self.z1_class == Some(Class::GT) && self.z2_class == Some(Class::GT) && self.gt_opposites.len() >= 2
    }
}

/// Two opposites of a height-one vertex `y` in `Δ^>`: `z′` opposite `y` in `Σ′` with
/// `Σ ∩ Σ′ = closure of st_Σ y`, and `z″` opposite `y` in `Σ″` with `Σ′ ∩ Σ″ = conv(C, D)`,
/// `C ⊇ proj_y ξ` a chamber of `Σ` and `D = proj_{z′} C ∖ z′`.
pub fn antipode_pair(b: &Building, h: &Hemispheres, pole: &Pole, y: crate::complex::VertexId, seed: u64) -> Result<AntipodePair> {
    let ys = Simplex::vertex(y);
    let sigma_chart = b.common_apartment(&pole.carrier, &ys)?;
    let apartment = b.apartment_complex(&sigma_chart);
    let (chart1, search1) = b.find_apartment_with_intersection(&sigma_chart, &apartment.star(&ys)?, seed)?;
    let z1s = opposite_in(b, &chart1, &ys);
    let p = b.proj(&ys, &pole.carrier)?;
    let pc = sigma_chart.to_coxeter(&p).ok_or_else(|| Error::precondition("projection outside the apartment"))?;
    let c = sigma_chart.to_building(
        b.coxeter()
            .complex()
            .facets_containing(&pc)
            .first()
            .expect("projection lies in a chamber"),
    );
    let d = b.proj(&z1s, &c)?.difference(&z1s);
    let cd = hull(b, &c, &d)?;
    let (chart2, search2) = b.find_apartment_with_intersection(&chart1, &cd, seed.wrapping_add(1))?;
    let z2s = opposite_in(b, &chart2, &ys);
    let z1 = z1s.vertices()[0];
    let z2 = z2s.vertices()[0];
    let gt_opposites = b
        .opposite_vertices(y)
        .into_iter()
        .filter(|v| h.classes.is(*v, Class::GT))
        .collect();
    Ok(AntipodePair {
        y,
        z1,
        z2,
        search1,
        search2,
        z1_class: h.classes.class(z1),
        z2_class: h.classes.class(z2),
        gt_opposites,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConePiece {
    pub tau: Simplex,
    pub route: OppositeRoute,
    pub search: Option<SearchRoute>,
    /// Facets of the horizontal apartment `A` (empty without a horizontal factor).
    pub apartment: Vec<Simplex>,
}

#[derive(Clone, Debug)]
pub struct ConeCover {
    pub sigma: Simplex,
    pub height: usize,
    pub horizontal: bool,
    pub pieces: Vec<ConePiece>,
    /// `K_σ`.
    pub k: SimplicialComplex,
    /// `K′_σ`.
    pub k_prime: SimplicialComplex,
}

/// Apartments of `L_h` through the chamber `c`, each with an apartment of `Δ` containing the
/// pole and the closure of `σ ∪ A`.
fn horizontal_apartments(
    b: &Building,
    pole: &Pole,
    sigma: &Simplex,
    lh: &SimplicialComplex,
    c: &Simplex,
) -> Result<Vec<(SimplicialComplex, ApartmentChart)>> {
    let hor_vertices = lh.vertex_set();
    let base = sigma.union(c);
    let charts: Vec<ApartmentChart> = b.enumerate_apartments()?.into_iter().filter(|ch| ch.contains(&base)).collect();
    let mut seen: BTreeSet<BTreeSet<crate::complex::VertexId>> = BTreeSet::new();
    let mut out = Vec::new();
    for ch in &charts {
        let verts: BTreeSet<_> = ch.image_vertices().intersection(&hor_vertices).copied().collect();
        if !seen.insert(verts.clone()) {
            continue;
        }
        let a = lh.full_subcomplex(&verts);
        let mut need = sigma.clone();
        for v in &verts {
            need = need.with(*v);
        }
        let carrier_chart = charts
            .iter()
            .find(|x| x.contains(&pole.carrier) && x.contains(&need))
            .ok_or_else(|| Error::NotFound(format!("no apartment contains the pole and σ ∪ A for σ={sigma:?}")))?;
        out.push((a, carrier_chart.clone()));
    }
    Ok(out)
}

/// `K_σ` and `K′_σ` for a nonempty image simplex `σ`: one cone over `L = (lk σ)^>` when the
/// link has no horizontal factor, otherwise a union of cones over `L ∗ A` for the apartments
/// `A` of `L_h = (lk σ)_hor` through a fixed chamber.
pub fn cone_cover(b: &Building, f: &Filtration, pole: &Pole, sigma: &Simplex, seed: u64) -> Result<ConeCover> {
    let height = f.height(sigma)?;
    if sigma.is_empty() || f.restriction(sigma)? != *sigma {
        return Err(Error::precondition(format!("{sigma:?} is not a nonempty image simplex")));
    }
    let h = f.hemispheres();
    let lh_ctx = h.link(sigma)?;
    let l = lh_ctx.gt();
    let lh = lh_ctx.hor_ver().hor;
    let mut pieces = Vec::new();
    let mut k = SimplicialComplex::void(b.complex().typeset().clone());
    let mut kp = k.clone();
    let horizontal = !lh.is_empty_complex();
    let jobs: Vec<(SimplicialComplex, Option<ApartmentChart>, Vec<Simplex>)> = if horizontal {
        let c = lh.facets()[0].clone();
        horizontal_apartments(b, pole, sigma, &lh, &c)?
            .into_iter()
            .map(|(a, ch)| Ok((l.join(&a)?, Some(ch), a.facets().to_vec())))
            .collect::<Result<_>>()?
    } else {
        vec![(l.clone(), None, Vec::new())]
    };
    for (i, (piece_l, chart, facets)) in jobs.into_iter().enumerate() {
        let g = find_good_opposite(b, h, pole, sigma, &piece_l, chart.as_ref(), seed.wrapping_add(i as u64))?;
        k = k.union(&cone_over(b, sigma, &piece_l, &g.tau, ConeVariant::Full)?.complex);
        kp = kp.union(&cone_over(b, sigma, &piece_l, &g.tau, ConeVariant::MinusStar)?.complex);
        pieces.push(ConePiece {
            tau: g.tau,
            route: g.route,
            search: g.search,
            apartment: facets,
        });
    }
    Ok(ConeCover {
        sigma: sigma.clone(),
        height,
        horizontal,
        pieces,
        k,
        k_prime: kp,
    })
}

impl ConeCover {
    /// `K_σ ⊆ F_h`, `K_σ = st_{F_h} σ ∪ (K_σ ∩ F_{h−1})`, `K′_σ = K_σ ∩ F_{h−1}`, and `K′_σ`
    /// homology-`dim Δ`-spherical.
    pub fn check(&self, f: &Filtration, dim: isize) -> Result<Tally> {
        let mut t = Tally::new();
        let fh = f.stage(self.height);
        let prev = f.stage(self.height - 1);
        let s = &self.sigma;
        t.record(self.k.is_subcomplex_of(fh.complex()), || format!("K_σ ⊄ F_h for σ={s:?}"));
        let inter = self.k.intersection(prev.complex());
        t.record(fh.complex().star(s)?.union(&inter) == self.k, || format!("K_σ ≠ st σ ∪ (K_σ ∩ F_(h-1)) for σ={s:?}"));
        t.record(inter == self.k_prime, || format!("K′_σ ≠ K_σ ∩ F_(h-1) for σ={s:?}"));
        let profile = reduced_homology(&self.k_prime)?;
        t.record(profile.is_spherical(dim), || format!("K′_σ not {dim}-spherical for σ={s:?}: {:?}", profile.betti_vector()));
        Ok(t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::classify;

    fn fano() -> Building {
        Building::build_flag(2, 2).unwrap()
    }

    fn midpoint(b: &Building) -> (Pole, Filtration) {
        let edge = b.complex().facets()[3].clone();
        let pole = Pole::barycenter(b, &edge).unwrap();
        let f = Filtration::new(Hemispheres::of_building(b, classify(b, &pole).unwrap())).unwrap();
        (pole, f)
    }

    #[test]
    fn empty_theta_gives_hull() {
        let b = fano();
        let c = b.complex().facets()[0].clone();
        let d = b.opposites_of(&c)[0].clone();
        let k = cone(&b, &c, &Simplex::empty(), &d, ConeVariant::Full).unwrap().complex;
        // the convex hull of opposite chambers is the whole hexagon
        assert_eq!(k.f_vector(), vec![6, 6]);
        let kp = cone(&b, &c, &Simplex::empty(), &d, ConeVariant::MinusStar).unwrap().complex;
        assert_eq!(kp.f_vector(), vec![6, 5]);
        let kk = cone(&b, &c, &Simplex::empty(), &d, ConeVariant::MinusBothStars).unwrap().complex;
        assert_eq!(kk.f_vector(), vec![6, 4]);
        assert!(cone(&b, &c, &Simplex::empty(), &c, ConeVariant::Full).is_err());
    }

    #[test]
    fn boundary_lemma_exhaustive_on_fano() {
        let t = audit_boundary_lemma(&fano()).unwrap();
        assert!(t.passed(), "{:?}", t.witnesses);
        assert!(t.instances > 1000);
    }

    #[test]
    fn cones_are_contractible() {
        let b = fano();
        let v = b.complex().vertex_ids().next().unwrap();
        let s = Simplex::vertex(v);
        let link = b.complex().link(&s).unwrap();
        for tau in b.opposites_of(&s) {
            assert!(cone_shape_holds(&b, &s, &link, &tau).unwrap());
            let one = link.generated(vec![link.facets()[0].clone()]);
            assert!(cone_shape_holds(&b, &s, &one, &tau).unwrap());
        }
    }

    #[test]
    fn good_opposites_on_fano_midpoint() {
        let b = fano();
        let (pole, f) = midpoint(&b);
        let h = f.hemispheres();
        for q in f.eq().vertex_ids() {
            let s = Simplex::vertex(q);
            let l = f.relative_link(&s).unwrap();
            let g = find_good_opposite(&b, h, &pole, &s, &l, None, 7).unwrap();
            assert_eq!(g.route, OppositeRoute::Constructive);
            assert!(cone_in_filter_holds(&f, &b, &s, &l, &g.tau).unwrap());
            assert!(audit_proj_condition(&b, h, &s, &l).unwrap().passed());
            assert!(audit_cone_in_south(&b, h, &s).unwrap().passed());
            let pair = antipode_pair(&b, h, &pole, q, 11).unwrap();
            assert!(pair.passed(), "{pair:?}");
            let cover = cone_cover(&b, &f, &pole, &s, 3).unwrap();
            assert!(!cover.horizontal);
            let t = cover.check(&f, b.dim()).unwrap();
            assert!(t.passed(), "{:?}", t.witnesses);
        }
    }

    #[test]
    fn thin_building_has_no_constructive_route() {
        let b = Building::build(&crate::building::BuildingSpec::thin(2)).unwrap();
        let edge = b.complex().facets()[0].clone();
        let pole = Pole::barycenter(&b, &edge).unwrap();
        let f = Filtration::new(Hemispheres::of_building(&b, classify(&b, &pole).unwrap())).unwrap();
        for s in f.image().iter().filter(|s| !s.is_empty()) {
            let l = f.relative_link(s).unwrap();
            if let Ok(g) = find_good_opposite(&b, f.hemispheres(), &pole, s, &l, None, 1) {
                assert_eq!(g.route, OppositeRoute::Scan);
            }
        }
    }

    #[test]
    fn pg3_covers() {
        let b = Building::build_flag(3, 2).unwrap();
        let chamber = b.complex().facets()[0].clone();
        let mut horizontal = 0;
        for carrier in [chamber.filter(|v| b.local_type(v) == 2), chamber.filter(|v| b.local_type(v) != 2)] {
            let pole = Pole::barycenter(&b, &carrier).unwrap();
            let f = Filtration::new(Hemispheres::of_building(&b, classify(&b, &pole).unwrap())).unwrap();
            for s in f.image().iter().filter(|s| !s.is_empty()) {
                let cover = cone_cover(&b, &f, &pole, s, 5).unwrap();
                horizontal += usize::from(cover.horizontal);
                let t = cover.check(&f, b.dim()).unwrap();
                assert!(t.passed(), "{s:?}: {:?}", t.witnesses);
            }
        }
        assert!(horizontal > 0);
    }
}
