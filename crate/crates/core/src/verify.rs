//! Verification jobs: Theorem A on closed coconvex supports, Theorem B on open hemisphere
//! complexes (with the filtration/cone pipeline behind its proof), Solomon–Tits, and the
//! lemma suites. Reports are deterministic JSON for a given job.

use std::collections::BTreeMap;

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::audit::Tally;
use crate::building::{Bounds, Building, BuildingSpec};
use crate::complex::{Simplex, SimplicialComplex, VertexId};
use crate::coxeter::{cos_sign_vec, dot, Sign};
use crate::error::{Error, Result};
use crate::filtration::cones::{self, ConeVariant, OppositeRoute};
use crate::filtration::Filtration;
use crate::homology::{homotopy_cm, reduced_homology_bounded, HomologyProfile};
use crate::metric::{classify, classify_cap, wellposedness_audit, Class, Pole, PoleSpec};
use crate::supports::{self, HemisphereKind, Hemispheres, SupportSpec, SupportedSubcomplex};

pub const SCHEMA: &str = "hemilab/v1";

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    TheoremA,
    TheoremB,
    LemmasMetric,
    LemmasFiltration,
    LemmasCones,
    SolomonTits,
}

impl CheckKind {
    pub const ALL: [CheckKind; 6] = [
        CheckKind::SolomonTits,
        CheckKind::TheoremA,
        CheckKind::TheoremB,
        CheckKind::LemmasMetric,
        CheckKind::LemmasFiltration,
        CheckKind::LemmasCones,
    ];

    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::input(format!("unknown check {s:?}")))
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleSet {
    /// Every vertex and the midpoint of every edge.
    All,
    Vertices,
    /// One vertex of each type and the first flag-edge midpoint.
    Representatives,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoleSelection {
    Set(PoleSet),
    List(Vec<PoleSpec>),
}

impl Default for PoleSelection {
    fn default() -> Self {
        PoleSelection::Set(PoleSet::All)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct JobBounds {
    pub max_cells: usize,
    /// Sample size for suites that are not run exhaustively.
    pub samples: usize,
    /// Samples for the law-of-cosines oracle.
    pub cosine_samples: usize,
    /// Above this many chambers, exhaustive lemma suites switch to sampling.
    pub exhaustive_chambers: usize,
    pub building: Option<Bounds>,
}

impl Default for JobBounds {
    fn default() -> Self {
        JobBounds {
            max_cells: 200_000,
            samples: 2_000,
            cosine_samples: 10_000,
            exhaustive_chambers: 50,
            building: None,
        }
    }
}

fn default_checks() -> Vec<CheckKind> {
    CheckKind::ALL.to_vec()
}

fn default_schema() -> String {
    SCHEMA.to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Job {
    #[serde(default = "default_schema")]
    pub schema: String,
    pub building: BuildingSpec,
    #[serde(default)]
    pub poles: PoleSelection,
    #[serde(default)]
    pub supports: Vec<SupportSpec>,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckKind>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub bounds: JobBounds,
}

impl Job {
    pub fn new(building: BuildingSpec) -> Self {
        Job {
            schema: SCHEMA.into(),
            building,
            poles: PoleSelection::default(),
            supports: Vec::new(),
            checks: default_checks(),
            seed: 0,
            bounds: JobBounds::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let job: Job = serde_json::from_str(s)?;
        if job.schema != SCHEMA {
            return Err(Error::input(format!("unsupported schema {:?}", job.schema)));
        }
        Ok(job)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    Advisory,
    Skipped,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Evidence {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<HomologyProfile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub links_checked: Option<usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub tallies: BTreeMap<String, Tally>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub counts: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: CheckKind,
    pub instance: String,
    pub part: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<String>,
    pub evidence: Evidence,
}

impl Verdict {
    fn new(check: CheckKind, instance: &str, part: &str) -> Self {
        Verdict {
            check,
            instance: instance.to_string(),
            part: part.to_string(),
            status: Status::Pass,
            note: None,
            witnesses: Vec::new(),
            evidence: Evidence::default(),
        }
    }

    fn skipped(mut self, why: impl Into<String>) -> Self {
        self.status = Status::Skipped;
        self.note = Some(why.into());
        self
    }

    fn require(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if !ok {
            self.status = Status::Fail;
            self.witnesses.push(witness());
        }
    }

    fn tally(&mut self, name: &str, t: Tally) {
        if !t.passed() {
            self.status = Status::Fail;
            self.witnesses.extend(t.witnesses.iter().map(|w| format!("{name}: {w}")));
        }
        self.evidence.tallies.insert(name.to_string(), t);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub advisory: usize,
    pub skipped: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictReport {
    pub schema: String,
    pub building: BuildingSpec,
    pub seed: u64,
    pub checks: Vec<CheckKind>,
    pub verdicts: Vec<Verdict>,
    pub summary: Summary,
}

impl VerdictReport {
    pub fn passed(&self) -> bool {
        self.summary.fail == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn find(&self, check: CheckKind, part: &str) -> Vec<&Verdict> {
        self.verdicts.iter().filter(|v| v.check == check && v.part == part).collect()
    }
}

/// A labelled pole.
#[derive(Clone, Debug)]
pub struct PoleInstance {
    pub label: String,
    pub spec: PoleSpec,
    pub pole: Pole,
}

pub fn label_of(spec: &PoleSpec) -> String {
    match spec {
        PoleSpec::Vertex { vertex } => format!("vertex:{vertex}"),
        PoleSpec::Barycenter { barycenter } => {
            format!("barycenter:{}", barycenter.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
        }
        other => serde_json::to_string(other).expect("pole spec serializes"),
    }
}

pub fn select_poles(b: &Building, sel: &PoleSelection) -> Result<Vec<PoleInstance>> {
    let specs: Vec<PoleSpec> = match sel {
        PoleSelection::List(list) => list.clone(),
        PoleSelection::Set(set) => {
            let mut out: Vec<PoleSpec> = Vec::new();
            match set {
                PoleSet::All | PoleSet::Vertices => {
                    out.extend(b.complex().vertex_ids().map(|vertex| PoleSpec::Vertex { vertex }));
                }
                PoleSet::Representatives => {
                    let mut seen = std::collections::BTreeSet::new();
                    for v in b.complex().vertex_ids() {
                        if seen.insert(b.complex().vtype(v)) {
                            out.push(PoleSpec::Vertex { vertex: v });
                        }
                    }
                }
            }
            match set {
                PoleSet::All => out.extend(b.complex().simplices_of_dim(1).map(|e| PoleSpec::Barycenter {
                    barycenter: e.vertices().to_vec(),
                })),
                PoleSet::Representatives => {
                    if let Some(e) = b.complex().simplices_of_dim(1).next() {
                        out.push(PoleSpec::Barycenter {
                            barycenter: e.vertices().to_vec(),
                        });
                    }
                }
                PoleSet::Vertices => {}
            }
            out
        }
    };
    specs
        .into_iter()
        .map(|spec| {
            Ok(PoleInstance {
                label: label_of(&spec),
                pole: Pole::from_spec(b, &spec)?,
                spec,
            })
        })
        .collect()
}

/// `∏ q^{n(n+1)/2}`: the number of chambers opposite a fixed one.
pub fn solomon_tits_rank(b: &Building) -> u64 {
    b.factors()
        .iter()
        .map(|f| if f.is_thin() { 1 } else { (f.field().order() as u64).pow((f.n() * (f.n() + 1) / 2) as u32) })
        .product()
}

fn profile(x: &SimplicialComplex, max_cells: usize) -> Result<HomologyProfile> {
    reduced_homology_bounded(x, max_cells)
}

fn check_cm(v: &mut Verdict, x: &SimplicialComplex, dim: isize, max_cells: usize) -> Result<()> {
    let cm = homotopy_cm(x, max_cells)?;
    v.evidence.links_checked = Some(cm.links_checked);
    v.require(x.dim() == dim, || format!("dimension {} ≠ {dim}", x.dim()));
    for f in cm.failures.iter().take(20) {
        v.witnesses.push(format!(
            "link of {:?} not {}-spherical: betti {:?}",
            f.simplex,
            f.expected_dim,
            f.profile.betti_vector()
        ));
    }
    if !cm.passed() {
        v.status = Status::Fail;
    }
    Ok(())
}

pub fn verify_solomon_tits(b: &Building, bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let mut v = Verdict::new(CheckKind::SolomonTits, "building", "wedge-of-spheres");
    let p = profile(b.complex(), bounds.max_cells)?;
    let expected = solomon_tits_rank(b) as usize;
    v.evidence.counts.insert("expected_top_betti".into(), expected);
    v.require(p.is_spherical(b.dim()), || format!("not {}-spherical: {:?}", b.dim(), p.betti_vector()));
    v.require(p.top_betti() == expected, || format!("top betti {} ≠ {expected}", p.top_betti()));
    v.evidence.profile = Some(p);
    let mut cm = Verdict::new(CheckKind::SolomonTits, "building", "cohen-macaulay");
    check_cm(&mut cm, b.complex(), b.dim(), bounds.max_cells)?;
    Ok(vec![v, cm])
}

fn support_label(spec: &SupportSpec) -> String {
    match spec {
        SupportSpec::Hemisphere { pole, kind } => {
            let k = serde_json::to_value(kind).expect("kind serializes");
            format!("hemisphere{} {}", k.as_str().unwrap_or(""), label_of(pole))
        }
        SupportSpec::CapComplement { pole, threshold, removed } => {
            format!("cap-complement({threshold},{removed:?}) {}", label_of(pole)).to_lowercase()
        }
        SupportSpec::RootComplement { root, removed } => {
            format!("root-complement({},{},{},{removed:?})", root.factor, root.i, root.j).to_lowercase()
        }
    }
}

/// Closed coconvex supports: nonempty ⇒ homotopy-CM of dimension `dim Δ`; thick and
/// `dim Δ ≥ 1` ⇒ nonzero top homology.
pub fn verify_theorem_a_support(b: &Building, s: &SupportedSubcomplex, bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let label = support_label(&s.spec);
    let mut sph = Verdict::new(CheckKind::TheoremA, &label, "sphericity");
    let mut nc = Verdict::new(CheckKind::TheoremA, &label, "noncontractible");
    if !s.closed_coconvex {
        return Ok(vec![
            sph.skipped("support is not closed with convex complement"),
            nc.skipped("support is not closed with convex complement"),
        ]);
    }
    if !s.violations.is_empty() {
        sph.status = Status::Advisory;
        sph.note = Some(format!("{} simplices leave the support; vertex-hull approximation", s.violations.len()));
        return Ok(vec![sph, nc.skipped("support not computed exactly")]);
    }
    if s.complex.is_void() || s.complex.is_empty_complex() {
        sph.note = Some("empty support".into());
        return Ok(vec![sph, nc.skipped("empty support")]);
    }
    check_cm(&mut sph, &s.complex, b.dim(), bounds.max_cells)?;
    let p = profile(&s.complex, bounds.max_cells)?;
    if b.is_thick() && b.dim() >= 1 {
        nc.require(p.betti(b.dim()) > 0, || format!("top homology vanishes: {:?}", p.betti_vector()));
        nc.evidence.profile = Some(p);
    } else {
        nc = nc.skipped("building is not thick of dimension ≥ 1");
    }
    Ok(vec![sph, nc])
}

pub fn verify_theorem_a(b: &Building, poles: &[PoleInstance], extra: &[SupportSpec], bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    for p in poles {
        let spec = SupportSpec::Hemisphere {
            pole: p.spec.clone(),
            kind: HemisphereKind::Ge,
        };
        let s = supports::hemisphere(b, &p.pole, HemisphereKind::Ge, spec)?;
        out.extend(verify_theorem_a_support(b, &s, bounds)?);
    }
    for spec in extra {
        match supports::support(b, spec) {
            Ok(s) => out.extend(verify_theorem_a_support(b, &s, bounds)?),
            Err(Error::Unsupported(msg)) => {
                out.push(Verdict::new(CheckKind::TheoremA, &support_label(spec), "sphericity").skipped(msg));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Theorem B for one pole: `Δ^>` homotopy-CM of dimension `dim Δ_ver`, nonzero top homology,
/// and the proof pipeline (filtration, cone covers with good opposites, antipode pairs).
pub fn verify_theorem_b_pole(b: &Building, p: &PoleInstance, seed: u64, bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let parts = ["sphericity", "noncontractible", "filtration", "cone-covers", "antipode-pairs"];
    if !b.is_thick() {
        return Ok(parts
            .iter()
            .map(|part| Verdict::new(CheckKind::TheoremB, &p.label, part).skipped("building is not thick"))
            .collect());
    }
    let h = Hemispheres::of_building(b, classify(b, &p.pole)?);
    let hv = h.hor_ver();
    let gt = h.gt();
    let dim_ver = hv.ver.dim();
    let mut out = Vec::new();

    let mut sph = Verdict::new(CheckKind::TheoremB, &p.label, "sphericity");
    sph.evidence.counts.insert("dim_ver".into(), dim_ver.max(0) as usize);
    check_cm(&mut sph, &gt, dim_ver, bounds.max_cells)?;
    out.push(sph);

    let mut nc = Verdict::new(CheckKind::TheoremB, &p.label, "noncontractible");
    let prof = profile(&gt, bounds.max_cells)?;
    nc.require(prof.betti(dim_ver) > 0, || format!("top homology vanishes: {:?}", prof.betti_vector()));
    nc.evidence.profile = Some(prof);
    out.push(nc);

    let f = Filtration::new(h)?;
    let mut fv = Verdict::new(CheckKind::TheoremB, &p.label, "filtration");
    for (name, t) in f.check_all()? {
        fv.tally(name, t);
    }
    fv.evidence.counts.insert("rank".into(), f.rank());
    for st in f.stages() {
        fv.evidence.counts.insert(format!("I_{}", st.k), st.new_centres.len());
    }
    out.push(fv);

    let mut cv = Verdict::new(CheckKind::TheoremB, &p.label, "cone-covers");
    let mut av = Verdict::new(CheckKind::TheoremB, &p.label, "antipode-pairs");
    if !hv.hor.is_empty_complex() {
        let why = "Δ_hor(x) ≠ ∅: the argument passes to the vertical join factor";
        out.push(cv.skipped(why));
        out.push(av.skipped(why));
        return Ok(out);
    }
    let mut t = Tally::new();
    for (i, s) in f.image().iter().filter(|s| !s.is_empty()).enumerate() {
        match cones::cone_cover(b, &f, &p.pole, s, seed.wrapping_add(i as u64)) {
            Ok(cover) => {
                for piece in &cover.pieces {
                    let key = match piece.route {
                        OppositeRoute::Constructive => "route_constructive",
                        OppositeRoute::Scan => "route_scan",
                    };
                    *cv.evidence.counts.entry(key.into()).or_default() += 1;
                }
                if cover.horizontal {
                    *cv.evidence.counts.entry("horizontal_covers".into()).or_default() += 1;
                }
                t.merge(cover.check(&f, b.dim())?);
            }
            Err(Error::NotFound(msg)) => t.record(false, || format!("σ={s:?}: {msg}")),
            Err(e) => return Err(e),
        }
    }
    cv.tally("cone-cover", t);
    out.push(cv);

    let mut t = Tally::new();
    let height_one: Vec<VertexId> = f
        .image()
        .iter()
        .filter(|s| s.len() == 1 && f.height(s).ok() == Some(1))
        .map(|s| s.vertices()[0])
        .collect();
    for (i, y) in height_one.iter().enumerate() {
        match cones::antipode_pair(b, f.hemispheres(), &p.pole, *y, seed.wrapping_add(1000 + i as u64)) {
            Ok(pair) => t.record(pair.passed(), || format!("y={y}: {pair:?}")),
            Err(e) => t.record(false, || format!("y={y}: {e}")),
        }
    }
    let eq: Vec<VertexId> = f.hemispheres().classes.vertices_of(Class::EQ).into_iter().collect();
    let min_gt = eq
        .iter()
        .map(|y| b.opposite_vertices(*y).into_iter().filter(|z| f.hemispheres().classes.is(*z, Class::GT)).count())
        .min();
    av.evidence.counts.insert("height_one_vertices".into(), height_one.len());
    if let Some(m) = min_gt {
        av.evidence.counts.insert("min_gt_opposites_of_equator_vertex".into(), m);
    }
    av.tally("antipode-pair", t);
    out.push(av);
    Ok(out)
}

pub fn verify_theorem_b(b: &Building, poles: &[PoleInstance], seed: u64, bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    for (i, p) in poles.iter().enumerate() {
        out.extend(verify_theorem_b_pole(b, p, seed.wrapping_add(i as u64 * 7919), bounds)?);
    }
    Ok(out)
}

fn vertex_vector(b: &Building, chart: &crate::building::ApartmentChart, v: VertexId) -> Vec<i64> {
    b.coxeter().vector(chart.preimage_of(v).expect("vertex in chart"))
}

/// No edge of the building has an obtuse angle at the origin: `cos d(u,v) ≥ 0`.
pub fn audit_edge_lengths(b: &Building) -> Result<Tally> {
    let mut t = Tally::new();
    for e in b.complex().simplices_of_dim(1) {
        let chart = b.common_apartment(e, e)?;
        let (u, v) = (e.vertices()[0], e.vertices()[1]);
        let s = cos_sign_vec(&vertex_vector(b, &chart, u), &vertex_vector(b, &chart, v));
        t.record(s != Sign::Neg, || format!("edge {e:?} longer than π/2"));
    }
    Ok(t)
}

/// Every pair of vertices of a chamber at distance `≤ π/2`, and a chamber never contains
/// antipodal points.
pub fn audit_chamber_diameter(b: &Building) -> Result<Tally> {
    let mut t = Tally::new();
    for c in b.complex().facets() {
        let chart = b.common_apartment(c, c)?;
        let vecs: Vec<Vec<i64>> = c.vertices().iter().map(|v| vertex_vector(b, &chart, *v)).collect();
        let ok = vecs.iter().all(|a| vecs.iter().all(|bb| cos_sign_vec(a, bb) != Sign::Neg));
        t.record(ok, || format!("chamber {c:?} has diameter > π/2"));
    }
    Ok(t)
}

/// `ρ_{Σ,C}` does not increase vertex distances, and preserves distances from vertices of `C̄`.
pub fn audit_retraction(b: &Building, samples: usize, seed: u64) -> Result<Tally> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let chart = b.standard_chart();
    let chambers: Vec<Simplex> = b.apartment_complex(&chart).facets().to_vec();
    let verts: Vec<VertexId> = b.complex().vertex_ids().collect();
    let mut t = Tally::new();
    let dist_dot = |u: VertexId, v: VertexId| -> Result<i128> {
        let pair = Simplex::new([u, v]);
        let ch = b.common_apartment(&Simplex::vertex(u), &Simplex::vertex(v))?;
        let _ = pair;
        Ok(dot(&vertex_vector(b, &ch, u), &vertex_vector(b, &ch, v)))
    };
    for _ in 0..samples {
        let c = chambers.choose(&mut rng).expect("apartment has chambers").clone();
        let u = *verts.choose(&mut rng).expect("vertices");
        let v = *verts.choose(&mut rng).expect("vertices");
        let ru = b.retract_to_coxeter(&chart, &c, &Simplex::vertex(u))?.vertices()[0];
        let rv = b.retract_to_coxeter(&chart, &c, &Simplex::vertex(v))?.vertices()[0];
        let before = dist_dot(u, v)?;
        let after = dot(&b.coxeter().vector(ru), &b.coxeter().vector(rv));
        // norms are type invariants, so inner products compare cosines
        t.record(after >= before, || format!("ρ increases d({u},{v}) for C={c:?}"));
        let w = c.vertices()[rng.gen_range(0..c.len())];
        let rw = chart.preimage_of(w).expect("chamber in chart");
        let exact = dot(&b.coxeter().vector(rw), &b.coxeter().vector(rv)) == dist_dot(w, v)?;
        t.record(exact, || format!("ρ changes d({w},{v}) with {w} ∈ C={c:?}"));
    }
    Ok(t)
}

fn random_point(b: &Building, rng: &mut ChaCha8Rng) -> crate::coxeter::RationalPoint {
    let cox = b.coxeter();
    let facets = cox.complex().facets();
    let c = &facets[rng.gen_range(0..facets.len())];
    let mask = loop {
        let m: u32 = rng.gen_range(1..(1u32 << c.len()));
        if m != 0 {
            break m;
        }
    };
    let carrier = Simplex::new((0..c.len()).filter(|i| mask & (1 << i) != 0).map(|i| c.vertices()[i]));
    let raw: Vec<i64> = (0..carrier.len()).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    let w: Vec<Ratio<i64>> = raw.iter().map(|r| Ratio::new(*r, total)).collect();
    cox.point(&carrier, &w).expect("valid point")
}

/// Spherical law of cosines on sampled rational triangles of the apartment model, checked
/// in floating point to `tol`.
pub fn audit_law_of_cosines(b: &Building, samples: usize, seed: u64, tol: f64) -> Result<(Tally, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    let mut degenerate = 0;
    let cox = b.coxeter();
    while t.instances < samples {
        let (x, y, z) = (random_point(b, &mut rng), random_point(b, &mut rng), random_point(b, &mut rng));
        let Ok((a, c, gamma)) = cox.apartment_angle_oracle(&x, &y, &z) else {
            degenerate += 1;
            continue;
        };
        let cos_yz = y.dot(&z) as f64 / ((y.norm2() as f64).sqrt() * (z.norm2() as f64).sqrt());
        let rhs = a.cos() * c.cos() + a.sin() * c.sin() * gamma.cos();
        let err = (cos_yz - rhs).abs();
        t.record(err <= tol, || format!("residual {err:e} at x={:?} y={:?} z={:?}", x.coords, y.coords, z.coords));
    }
    Ok((t, degenerate))
}

/// Barycentres of the simplices of `Δ^>`, `Δ^≥`, `Δ^=` lie on the matching side of the
/// equator (checked through the retraction onto the pole's chart).
pub fn audit_hemisphere_fullness(b: &Building, pole: &Pole, h: &Hemispheres) -> Result<Tally> {
    let c = pole.chamber(b);
    let mut t = Tally::new();
    for (kind, x) in [(HemisphereKind::Gt, h.gt()), (HemisphereKind::Ge, h.ge()), (HemisphereKind::Eq, h.eq())] {
        for s in x.simplices().iter().filter(|s| !s.is_empty()) {
            let r = b.retract_to_coxeter(&pole.chart, &c, s)?;
            let mut sum = vec![0i64; pole.point.coords.len()];
            for v in r.vertices() {
                for (acc, u) in sum.iter_mut().zip(b.coxeter().vector(*v)) {
                    *acc += u;
                }
            }
            let sign = cos_sign_vec(&pole.point.coords, &sum);
            let ok = match kind {
                HemisphereKind::Gt => sign == Sign::Neg,
                HemisphereKind::Ge => sign != Sign::Pos,
                HemisphereKind::Eq => sign == Sign::Zero,
            };
            t.record(ok, || format!("{kind:?}: barycentre of {s:?} has sign {sign:?}"));
        }
    }
    Ok(t)
}

/// Open balls of radius `≤ π/2` contain no antipodal vertex pair.
pub fn audit_open_convex_antipodes(b: &Building, pole: &Pole) -> Result<Tally> {
    let mut t = Tally::new();
    for th in [Ratio::from_integer(0), Ratio::new(1, 2)] {
        let inside = classify_cap(b, pole, th)?.vertices_of(Class::LT);
        for v in &inside {
            let bad = b.opposite_vertices(*v).into_iter().find(|w| inside.contains(w));
            t.record(bad.is_none(), || format!("cap cos>{th} contains antipodes {v}, {bad:?}"));
        }
    }
    Ok(t)
}

pub fn verify_lemmas_metric(b: &Building, poles: &[PoleInstance], seed: u64, bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    let mut v = Verdict::new(CheckKind::LemmasMetric, "building", "edge-length");
    v.tally("edge-length", audit_edge_lengths(b)?);
    out.push(v);
    let mut v = Verdict::new(CheckKind::LemmasMetric, "building", "chamber-diameter");
    v.tally("chamber-diameter", audit_chamber_diameter(b)?);
    out.push(v);
    let mut v = Verdict::new(CheckKind::LemmasMetric, "building", "retraction");
    v.tally("retraction", audit_retraction(b, bounds.samples, seed)?);
    out.push(v);
    let mut v = Verdict::new(CheckKind::LemmasMetric, "building", "law-of-cosines");
    let (t, degenerate) = audit_law_of_cosines(b, bounds.cosine_samples, seed ^ 0x5eed, 1e-9)?;
    v.evidence.counts.insert("degenerate_resampled".into(), degenerate);
    v.tally("law-of-cosines", t);
    out.push(v);
    let exhaustive = b.complex().facets().len() <= bounds.exhaustive_chambers;
    for (i, p) in poles.iter().enumerate() {
        let mut v = Verdict::new(CheckKind::LemmasMetric, &p.label, "wellposedness");
        let sample = (!exhaustive).then_some((bounds.samples.min(64), seed.wrapping_add(i as u64)));
        let r = wellposedness_audit(b, &p.pole, sample)?;
        v.evidence.counts.insert("vertices_checked".into(), r.vertices_checked);
        v.evidence.counts.insert("choices_checked".into(), r.choices_checked);
        for d in r.disagreements.iter().take(20) {
            v.witnesses.push(format!("{d:?}"));
        }
        if !r.passed() {
            v.status = Status::Fail;
        }
        out.push(v);
        let h = Hemispheres::of_building(b, classify(b, &p.pole)?);
        let mut v = Verdict::new(CheckKind::LemmasMetric, &p.label, "hemisphere-fullness");
        v.tally("fullness", audit_hemisphere_fullness(b, &p.pole, &h)?);
        let mut jt = Tally::new();
        jt.record(h.join_law_holds()?, || "join decomposition fails".into());
        v.tally("join-law", jt);
        out.push(v);
        let mut v = Verdict::new(CheckKind::LemmasMetric, &p.label, "open-convex-antipodes");
        v.tally("open-caps", audit_open_convex_antipodes(b, &p.pole)?);
        if v.status == Status::Pass {
            v.status = Status::Advisory;
            v.note = Some("balls only; general open convex sets are out of scope".into());
        }
        out.push(v);
    }
    Ok(out)
}

pub fn verify_lemmas_filtration(b: &Building, poles: &[PoleInstance]) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    for p in poles {
        let f = Filtration::new(Hemispheres::of_building(b, classify(b, &p.pole)?))?;
        let mut v = Verdict::new(CheckKind::LemmasFiltration, &p.label, "suites");
        for (name, t) in f.check_all()? {
            v.tally(name, t);
        }
        v.evidence.counts.insert("image".into(), f.image().len());
        v.evidence.counts.insert("rank".into(), f.rank());
        out.push(v);
    }
    Ok(out)
}

/// Boundary lemma, exhaustively on small buildings and on seeded samples otherwise.
pub fn audit_boundary_lemma(b: &Building, bounds: &JobBounds, seed: u64) -> Result<Tally> {
    if b.complex().facets().len() <= bounds.exhaustive_chambers {
        return cones::audit_boundary_lemma(b);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let simplices: Vec<&Simplex> = b.complex().simplices().iter().filter(|s| !s.is_empty()).collect();
    let mut t = Tally::new();
    while t.instances < bounds.samples.min(500) {
        let sigma = simplices[rng.gen_range(0..simplices.len())];
        let opp = b.opposites_of(sigma);
        let Some(tau) = opp.choose(&mut rng) else { continue };
        let star = b.complex().star(sigma)?;
        let theta = &star.simplices()[rng.gen_range(0..star.num_simplices())];
        let ok = cones::boundary_lemma_holds(b, sigma, theta, tau)?;
        t.record(ok, || format!("σ={sigma:?} θ={theta:?} τ={tau:?}"));
    }
    Ok(t)
}

/// For every apartment (or a sample) and every closed chamber / closed vertex star `K` in it,
/// an apartment meeting it in exactly `K`.
pub fn audit_apartment_intersection(b: &Building, bounds: &JobBounds, seed: u64) -> Result<(Tally, BTreeMap<String, usize>)> {
    let mut charts = b.enumerate_apartments()?;
    if charts.len() > 100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        charts.shuffle(&mut rng);
        charts.truncate(bounds.samples.clamp(1, 20));
    }
    let mut t = Tally::new();
    let mut routes: BTreeMap<String, usize> = BTreeMap::new();
    for (i, chart) in charts.iter().enumerate() {
        let ap = b.apartment_complex(chart);
        let mut targets: Vec<SimplicialComplex> = ap.facets().iter().map(|c| ap.generated(vec![c.clone()])).collect();
        for v in ap.vertex_ids() {
            targets.push(ap.star(&Simplex::vertex(v))?);
        }
        for (j, k) in targets.iter().enumerate() {
            match b.find_apartment_with_intersection(chart, k, seed.wrapping_add((i * 1000 + j) as u64)) {
                Ok((other, route)) => {
                    let common: std::collections::BTreeSet<VertexId> =
                        chart.image_vertices().intersection(&other.image_vertices()).copied().collect();
                    let meet = b.complex().full_subcomplex(&common);
                    t.record(meet == *k, || format!("apartment {i}: intersection {:?} ≠ {:?}", meet.facets(), k.facets()));
                    let key = serde_json::to_value(route).expect("route serializes");
                    *routes.entry(key.as_str().unwrap_or("?").to_string()).or_default() += 1;
                }
                Err(e) => t.record(false, || format!("apartment {i}, target {:?}: {e}", k.facets())),
            }
        }
    }
    Ok((t, routes))
}

pub fn verify_lemmas_cones(b: &Building, poles: &[PoleInstance], seed: u64, bounds: &JobBounds) -> Result<Vec<Verdict>> {
    let mut out = Vec::new();
    let mut v = Verdict::new(CheckKind::LemmasCones, "building", "boundary-lemma");
    v.tally("boundary-lemma", audit_boundary_lemma(b, bounds, seed)?);
    out.push(v);

    let mut v = Verdict::new(CheckKind::LemmasCones, "building", "apartment-intersection");
    if b.is_thick() {
        let (t, routes) = audit_apartment_intersection(b, bounds, seed)?;
        v.evidence.counts.extend(routes);
        v.tally("apartment-intersection", t);
        out.push(v);
    } else {
        out.push(v.skipped("building is not thick"));
    }

    for (i, p) in poles.iter().enumerate() {
        let h = Hemispheres::of_building(b, classify(b, &p.pole)?);
        let f = Filtration::new(h)?;
        let h = f.hemispheres();
        let image: Vec<&Simplex> = f.image().iter().filter(|s| !s.is_empty()).collect();

        let mut v = Verdict::new(CheckKind::LemmasCones, &p.label, "cone-in-south");
        let mut t = Tally::new();
        for s in f.eq().simplices().iter().filter(|s| !s.is_empty()) {
            t.merge(cones::audit_cone_in_south(b, h, s)?);
        }
        v.tally("cone-in-south", t);
        out.push(v);

        let mut shape = Tally::new();
        let mut proj = Tally::new();
        let mut filt = Tally::new();
        for s in &image {
            let l = f.relative_link(s)?;
            let opposites = b.opposites_of(s);
            for tau in opposites.iter().take(4) {
                let ok = cones::cone_shape_holds(b, s, &l, tau)?;
                shape.record(ok, || format!("K′({s:?}, lk_F, {tau:?}) is not a cone of the right dimension"));
            }
            proj.merge(cones::audit_proj_condition(b, h, s, &l)?);
            for tau in &opposites {
                if cones::equator_inside_star(b, h, s, &l, tau)? {
                    let ok = cones::cone_in_filter_holds(&f, b, s, &l, tau)?;
                    filt.record(ok, || format!("σ={s:?} τ={tau:?}: K'' ⊄ F_h or K′ ≠ K'' ∩ F_(h-1)"));
                }
            }
        }
        let mut v = Verdict::new(CheckKind::LemmasCones, &p.label, "cones-contractible");
        v.tally("cones-contractible", shape);
        out.push(v);
        let mut v = Verdict::new(CheckKind::LemmasCones, &p.label, "proj-condition");
        v.tally("proj-condition", proj);
        out.push(v);
        let mut v = Verdict::new(CheckKind::LemmasCones, &p.label, "cone-in-filter");
        v.tally("cone-in-filter", filt);
        out.push(v);

        let mut v = Verdict::new(CheckKind::LemmasCones, &p.label, "apartment-condition");
        if !b.is_thick() {
            out.push(v.skipped("building is not thick"));
            continue;
        }
        let mut t = Tally::new();
        let mut glue = Tally::new();
        for (j, s) in image.iter().enumerate() {
            let l = f.relative_link(s)?;
            let horizontal = !h.link(s)?.hor_ver().hor.is_empty_complex();
            if horizontal {
                continue;
            }
            match cones::find_good_opposite(b, h, &p.pole, s, &l, None, seed.wrapping_add((i * 100 + j) as u64)) {
                Ok(g) => {
                    let key = match g.route {
                        OppositeRoute::Constructive => "route_constructive",
                        OppositeRoute::Scan => "route_scan",
                    };
                    *v.evidence.counts.entry(key.into()).or_default() += 1;
                    t.record(cones::cone_in_filter_holds(&f, b, s, &l, &g.tau)?, || format!("σ={s:?}: good τ fails the filter lemma"));
                    let kp = cones::cone_over(b, s, &l, &g.tau, ConeVariant::MinusStar)?.complex;
                    let prof = profile(&kp, bounds.max_cells)?;
                    glue.record(prof.is_acyclic(), || format!("K′ for σ={s:?} not acyclic"));
                }
                Err(Error::NotFound(m)) => t.record(false, || format!("σ={s:?}: {m}")),
                Err(e) => return Err(e),
            }
        }
        v.tally("apartment-condition", t);
        v.tally("cone-acyclic", glue);
        out.push(v);
    }
    Ok(out)
}

/// Runs every requested check. Verdict order follows the job's check list, then poles.
pub fn run(job: &Job) -> Result<VerdictReport> {
    if job.schema != SCHEMA {
        return Err(Error::input(format!("unsupported schema {:?}", job.schema)));
    }
    let b = match job.bounds.building {
        Some(bb) => Building::build_with(&job.building, bb)?,
        None => Building::build(&job.building)?,
    };
    run_on(&b, job)
}

pub fn run_on(b: &Building, job: &Job) -> Result<VerdictReport> {
    let poles = select_poles(b, &job.poles)?;
    let mut verdicts = Vec::new();
    for check in &job.checks {
        let seed = job.seed;
        let vs = match check {
            CheckKind::SolomonTits => verify_solomon_tits(b, &job.bounds)?,
            CheckKind::TheoremA => verify_theorem_a(b, &poles, &job.supports, &job.bounds)?,
            CheckKind::TheoremB => verify_theorem_b(b, &poles, seed, &job.bounds)?,
            CheckKind::LemmasMetric => verify_lemmas_metric(b, &poles, seed, &job.bounds)?,
            CheckKind::LemmasFiltration => verify_lemmas_filtration(b, &poles)?,
            CheckKind::LemmasCones => verify_lemmas_cones(b, &poles, seed, &job.bounds)?,
        };
        verdicts.extend(vs);
    }
    for v in verdicts.iter_mut() {
        // no vacuous passes: a check that examined nothing is reported as skipped
        let empty = !v.evidence.tallies.is_empty() && v.evidence.tallies.values().all(|t| t.instances == 0);
        if v.status == Status::Pass && empty && v.evidence.profile.is_none() {
            v.status = Status::Skipped;
            v.note = Some("no instances in scope".into());
        }
    }
    let mut summary = Summary::default();
    for v in &verdicts {
        match v.status {
            Status::Pass => summary.pass += 1,
            Status::Fail => summary.fail += 1,
            Status::Advisory => summary.advisory += 1,
            Status::Skipped => summary.skipped += 1,
        }
    }
    Ok(VerdictReport {
        schema: SCHEMA.into(),
        building: job.building.clone(),
        seed: job.seed,
        checks: job.checks.clone(),
        verdicts,
        summary,
    })
}
