use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use num_rational::Ratio;
use proptest::prelude::*;

use hemilab::building::{Building, BuildingSpec};
use hemilab::complex::VertexInfo;
use hemilab::filtration::Filtration;
use hemilab::homology::{reduced_homology, ChainComplex};
use hemilab::metric::{classify, wellposedness_audit, Class, Pole, PoleSpec};
use hemilab::supports::Hemispheres;
use hemilab::verify::{self, CheckKind, Job, PoleSelection, Status};
use hemilab::{Simplex, SimplicialComplex};

fn fano() -> &'static Building {
    static B: OnceLock<Building> = OnceLock::new();
    B.get_or_init(|| Building::build_flag(2, 2).unwrap())
}

fn flag_pg1_join_fano() -> &'static Building {
    static B: OnceLock<Building> = OnceLock::new();
    B.get_or_init(|| {
        let spec: BuildingSpec = serde_json::from_str(r#"{"join":[{"family":"A","n":1,"q":2},{"family":"A","n":2,"q":2}]}"#).unwrap();
        Building::build(&spec).unwrap()
    })
}

fn plain(facets: &[Vec<u32>]) -> SimplicialComplex {
    let info: BTreeMap<u32, VertexInfo> = facets
        .iter()
        .flatten()
        .map(|v| (*v, VertexInfo { vtype: 0, label: v.to_string() }))
        .collect();
    SimplicialComplex::from_simplices(&info, BTreeSet::from([0]), facets.iter().map(|f| Simplex::new(f.iter().copied())).collect()).unwrap()
}

fn random_complex() -> impl Strategy<Value = Vec<Vec<u32>>> {
    prop::collection::vec(prop::collection::btree_set(0u32..7, 1..4).prop_map(|s| s.into_iter().collect()), 1..8)
}

/// A rational point of some chamber: chamber index, nonempty vertex mask, positive weights.
fn random_pole(b: &Building, chamber: usize, mask: u32, raw: &[i64]) -> Pole {
    let facets = b.complex().facets();
    let c = &facets[chamber % facets.len()];
    let mut verts = Vec::new();
    let mut w = Vec::new();
    for (i, v) in c.vertices().iter().enumerate() {
        if mask & (1 << i) != 0 {
            verts.push(*v);
            w.push(raw[i % raw.len()]);
        }
    }
    if verts.is_empty() {
        verts.push(c.vertices()[0]);
        w.push(1);
    }
    let total: i64 = w.iter().sum();
    let weights: Vec<Ratio<i64>> = w.iter().map(|x| Ratio::new(*x, total)).collect();
    Pole::weighted(b, &Simplex::new(verts.iter().copied()), &weights).unwrap()
}

fn pole_args() -> impl Strategy<Value = (usize, u32, Vec<i64>)> {
    (0usize..1000, 1u32..16, prop::collection::vec(1i64..6, 4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn boundary_squares_to_zero(facets in random_complex()) {
        let x = plain(&facets);
        prop_assert!(ChainComplex::new(&x).boundary_squared_vanishes());
        prop_assert!(reduced_homology(&x).unwrap().euler_consistent());
    }

    #[test]
    fn cones_are_acyclic(facets in random_complex()) {
        let coned: Vec<Vec<u32>> = facets.iter().map(|f| f.iter().copied().chain([99]).collect()).collect();
        prop_assert!(reduced_homology(&plain(&coned)).unwrap().is_acyclic());
    }

    #[test]
    fn suspension_shifts_homology(facets in random_complex()) {
        let x = plain(&facets);
        let susp: Vec<Vec<u32>> = facets
            .iter()
            .flat_map(|f| [f.iter().copied().chain([100]).collect(), f.iter().copied().chain([101]).collect()])
            .collect();
        let (p, q) = (reduced_homology(&x).unwrap(), reduced_homology(&plain(&susp)).unwrap());
        for k in -1..=x.dim() {
            prop_assert_eq!(p.betti(k), q.betti(k + 1));
            prop_assert_eq!(p.torsion(k), q.torsion(k + 1));
        }
    }

    #[test]
    fn classification_is_wellposed((c, m, w) in pole_args()) {
        let b = fano();
        let pole = random_pole(b, c, m, &w);
        prop_assert!(wellposedness_audit(b, &pole, None).unwrap().passed());
    }

    #[test]
    fn hemisphere_complexes_nest((c, m, w) in pole_args()) {
        let b = fano();
        let pole = random_pole(b, c, m, &w);
        let h = Hemispheres::of_building(b, classify(b, &pole).unwrap());
        let (gt, ge, eq) = (h.gt(), h.ge(), h.eq());
        prop_assert!(gt.is_subcomplex_of(&ge));
        prop_assert!(eq.is_subcomplex_of(&ge));
        prop_assert!(h.join_law_holds().unwrap());
        // vertices of the carrier lie within π/2 of the pole
        for v in pole.carrier.vertices() {
            prop_assert!(h.classes.is(*v, Class::LT));
        }
        let t = verify::audit_hemisphere_fullness(b, &pole, &h).unwrap();
        prop_assert!(t.passed(), "{:?}", t.witnesses);
    }

    #[test]
    fn filtration_invariants((c, m, w) in pole_args()) {
        let b = fano();
        let pole = random_pole(b, c, m, &w);
        let f = Filtration::new(Hemispheres::of_building(b, classify(b, &pole).unwrap())).unwrap();
        for (name, t) in f.check_all().unwrap() {
            prop_assert!(t.passed(), "{}: {:?}", name, t.witnesses);
        }
        for s in f.image() {
            prop_assert_eq!(f.restriction(s).unwrap(), s.clone());
        }
    }

    #[test]
    fn hemisphere_theorems_on_random_poles((c, m, w) in pole_args(), join in any::<bool>()) {
        let b = if join { flag_pg1_join_fano() } else { fano() };
        let facets = b.complex().facets();
        let chamber = &facets[c % facets.len()];
        let verts: Vec<u32> = chamber.vertices().iter().enumerate().filter(|(i, _)| m & (1 << i) != 0).map(|(_, v)| *v).collect();
        let verts = if verts.is_empty() { vec![chamber.vertices()[0]] } else { verts };
        let raw: Vec<i64> = (0..verts.len()).map(|i| w[i % w.len()]).collect();
        let total: i64 = raw.iter().sum();
        let weights: Vec<String> = raw.iter().map(|x| format!("{x}/{total}")).collect();
        let mut job = Job::new(b.spec().clone());
        job.poles = PoleSelection::List(vec![PoleSpec::Weighted { vertices: verts, weights }]);
        job.checks = vec![CheckKind::TheoremA, CheckKind::TheoremB];
        let r = verify::run_on(b, &job).unwrap();
        prop_assert!(r.passed(), "{}", r.to_json());
        prop_assert!(r.verdicts.iter().any(|v| v.status == Status::Pass));
    }

    #[test]
    fn retraction_never_increases_distance(seed in any::<u64>()) {
        let t = verify::audit_retraction(fano(), 50, seed).unwrap();
        prop_assert!(t.passed(), "{:?}", t.witnesses);
    }

    #[test]
    fn law_of_cosines_holds(seed in any::<u64>()) {
        let (t, _) = verify::audit_law_of_cosines(fano(), 100, seed, 1e-9).unwrap();
        prop_assert!(t.passed(), "{:?}", t.witnesses);
    }

    #[test]
    fn opposition_is_an_involution(i in 0usize..1000) {
        let b = fano();
        let simplices = b.complex().simplices();
        let s = &simplices[i % simplices.len()];
        for t in b.opposites_of(s) {
            prop_assert!(b.opposites_of(&t).contains(s));
            prop_assert!(b.opposite(s, &t));
        }
    }

    #[test]
    fn reports_replay_identically(seed in any::<u64>()) {
        let mut job = Job::new(BuildingSpec::thin(2));
        job.seed = seed;
        job.bounds.cosine_samples = 200;
        job.bounds.samples = 50;
        prop_assert_eq!(verify::run(&job).unwrap().to_json(), verify::run(&job).unwrap().to_json());
    }
}
