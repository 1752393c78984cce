use super::*;
use crate::linalg::tolerance;
use crate::random::{random_gauge_2, random_morphism, random_rho, random_trivialized, random_twist, twisted_rho, TrivializedGerbe, Twist};
use crate::surface::builders::*;
use crate::surface::SimplicialSurface;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

struct Chain {
    g: Vec<TrivializedGerbe>,
    tw: Vec<Twist>,
    rng: ChaCha8Rng,
}

fn chain(base: SimplicialSurface, len: usize, cover: usize, seed: u64) -> Chain {
    let base = Arc::new(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rho = random_rho(&base, &mut rng);
    let mut g = vec![random_trivialized(base.clone(), cover, &rho, &mut rng)];
    let mut tw = Vec::new();
    for _ in 1..len {
        let t = random_twist(&base, &mut rng);
        rho = twisted_rho(&rho, &t);
        g.push(random_trivialized(base.clone(), cover, &rho, &mut rng));
        tw.push(t);
    }
    Chain { g, tw, rng }
}

impl Chain {
    fn morphism(&mut self, i: usize, rank: usize) -> Arc<OneMorphism> {
        Arc::new(random_morphism(&self.g[i], &self.g[i + 1], &self.tw[i], rank, &mut self.rng).unwrap())
    }
}

fn assert_ok(r: crate::report::Report) {
    assert!(r.is_ok(), "failed laws {:?}: {:#?}", r.failed_laws(), r);
}

#[test]
fn random_morphisms_satisfy_axioms() {
    let mut c = chain(torus7(), 2, 3, 1);
    for rank in [1, 2] {
        let a = c.morphism(0, rank);
        assert_ok(a.validate(true));
        assert_ok(a.validate_d(usize::MAX));
    }
    let id = identity_1(&c.g[0].gerbe);
    assert_ok(id.validate(true));
    assert_ok(id.validate_d(usize::MAX));
}

#[test]
fn broken_alpha_is_rejected() {
    let mut c = chain(torus7(), 2, 2, 2);
    let a = c.morphism(0, 1);
    let mut at = a.atomize();
    let key = *at.alpha.keys().find(|k| k.1 != k.2).unwrap();
    at.alpha.insert(key, at.alpha[&key].clone() * crate::linalg::cis(0.1));
    let r = OneMorphism::atomic(at).validate(true);
    assert!(!r.is_ok());
    assert!(r.failed_laws().contains(&"1M2"));
}

#[test]
fn composition_is_strictly_associative() {
    let mut c = chain(torus7(), 4, 2, 3);
    let (a1, a2, a3) = (c.morphism(0, 1), c.morphism(1, 2), c.morphism(2, 1));
    let left = compose_1(&compose_1(&a3, &a2).unwrap(), &a1).unwrap();
    let right = compose_1(&a3, &compose_1(&a2, &a1).unwrap()).unwrap();
    assert!(left == right);
    assert_eq!(**left.cover(), **right.cover());
    assert_eq!(left.bundle(), right.bundle());
    for v in 0..left.cover().base().n_vertices() {
        for &k in left.cover().at_vertex(v) {
            for &kp in left.cover().at_vertex(v) {
                assert_eq!(left.alpha(v, k, kp), right.alpha(v, k, kp));
            }
        }
    }
    let two = compose_1(&a2, &a1).unwrap();
    assert_ok(two.validate(true));
    assert_ok(two.validate_d(2000));
}

#[test]
fn composition_rejects_mismatched_gerbes() {
    let mut c = chain(torus7(), 3, 2, 4);
    let (a1, a2) = (c.morphism(0, 1), c.morphism(1, 1));
    assert!(matches!(compose_1(&a1, &a2), Err(crate::GerbeError::GerbeMismatch(_))));
}

#[test]
fn vertical_composition_and_identities() {
    let mut c = chain(torus7(), 2, 2, 5);
    let a = c.morphism(0, 2);
    let (ap, b1) = random_gauge_2(&a, &mut c.rng);
    let (app, b2) = random_gauge_2(&ap, &mut c.rng);
    assert_ok(b1.validate());
    assert_ok(b2.validate());
    assert_ok(identity_2(&a).validate());
    let eps = tolerance();
    let v = vertical(&b2, &b1).unwrap();
    assert_ok(v.validate());
    assert!(Arc::ptr_eq(v.target(), &app));
    assert!(vertical(&b1, &identity_2(&a)).unwrap().approx_eq(&b1, eps));
    assert!(vertical(&identity_2(&ap), &b1).unwrap().approx_eq(&b1, eps));
    let inv = inverse_2(&b1).unwrap();
    assert!(vertical(&inv, &b1).unwrap().approx_eq(&identity_2(&a), eps));
    assert!(vertical(&b1, &b1).is_err());
}

#[test]
fn canonical_form_round_trips_and_detects_obstructions() {
    let mut c = chain(torus7(), 2, 2, 6);
    let a = c.morphism(0, 1);
    let (_, b) = random_gauge_2(&a, &mut c.rng);
    let rep = b.to_rep();
    let back = TwoMorphism::from_rep(rep.clone()).unwrap();
    assert!(back.exactly_eq(&b));
    assert!(equivalent_2(&rep, &back.to_rep()).unwrap());
    // Duplicate an index of W with a disagreeing value.
    let mut bad = rep.clone();
    let w = Arc::new({
        let mut labels = rep.w.labels().to_vec();
        labels.push(vec!["dup".into()]);
        let mut sup = rep.w.supports().to_vec();
        sup.push(rep.w.support(0).clone());
        crate::site::Cover::unchecked(rep.w.base().clone(), labels, sup)
    });
    let n = rep.w.len();
    bad.w = w;
    bad.legs[0].push(rep.legs[0][0]);
    bad.legs[1].push(rep.legs[1][0]);
    let v0 = (0..bad.w.base().n_vertices()).find(|&v| rep.w.valid(0, crate::site::Simplex::V(v))).unwrap();
    for v in 0..bad.w.base().n_vertices() {
        if rep.w.valid(0, crate::site::Simplex::V(v)) {
            let mut m = rep.beta[&(v, 0)].clone();
            if v == v0 {
                m *= crate::linalg::cis(0.5);
            }
            bad.beta.insert((v, n), m);
        }
    }
    assert!(matches!(TwoMorphism::from_rep(bad), Err(crate::GerbeError::DescentObstruction(_))));
    let mut missing = rep;
    missing.beta.retain(|&(_, k), _| k != 0);
    assert!(TwoMorphism::from_rep(missing).is_err());
}

#[test]
fn horizontal_composition_and_interchange() {
    let mut c = chain(torus7(), 3, 2, 7);
    let a1 = c.morphism(0, 1);
    let a2 = c.morphism(1, 2);
    let (a1p, b1) = random_gauge_2(&a1, &mut c.rng);
    let (_, b1p) = random_gauge_2(&a1p, &mut c.rng);
    let (a2p, b2) = random_gauge_2(&a2, &mut c.rng);
    let (_, b2p) = random_gauge_2(&a2p, &mut c.rng);
    let h = horizontal(&b2, &b1).unwrap();
    assert_ok(h.validate());
    let lhs = horizontal(&vertical(&b2p, &b2).unwrap(), &vertical(&b1p, &b1).unwrap()).unwrap();
    let rhs = vertical(&horizontal(&b2p, &b1p).unwrap(), &h).unwrap();
    assert!(lhs.approx_eq(&rhs, tolerance()), "interchange deviation {}", lhs.max_deviation(&rhs));
    let ids = horizontal(&identity_2(&a2), &identity_2(&a1)).unwrap();
    let id = identity_2(&Arc::new(compose_1(&a2, &a1).unwrap()));
    assert!(ids.approx_eq(&id, tolerance()));
}

#[test]
fn unitors_and_triangle_identity() {
    let mut c = chain(torus7(), 3, 2, 8);
    let a = c.morphism(0, 2);
    let ap = c.morphism(1, 1);
    let lam = left_unitor(&a).unwrap();
    let rho = right_unitor(&a).unwrap();
    assert_ok(lam.validate());
    assert_ok(rho.validate());
    let x = horizontal(&identity_2(&ap), &rho).unwrap();
    let y = horizontal(&left_unitor(&ap).unwrap(), &identity_2(&a)).unwrap();
    assert!(x.approx_eq(&y, tolerance()), "deviation {}", x.max_deviation(&y));
    let id = identity_1(&c.g[0].gerbe);
    let id = Arc::new(id);
    let l = left_unitor(&id).unwrap();
    let r = right_unitor(&id).unwrap();
    assert!(l.approx_eq(&r, tolerance()));
}

#[test]
fn inverses_satisfy_zig_zag() {
    let mut c = chain(torus7(), 2, 2, 9);
    let a = c.morphism(0, 1);
    let inv = invert_1(&a).unwrap();
    assert_ok(inv.inverse.validate(true));
    assert_ok(inv.i_l.validate());
    assert_ok(inv.i_r.validate());
    let s1 = horizontal(&inv.i_r, &identity_2(&a)).unwrap();
    let s2 = horizontal(&identity_2(&a), &inv.i_l).unwrap();
    let lam = left_unitor(&a).unwrap();
    let zz = vertical(&lam, &vertical(&s2, &s1).unwrap()).unwrap();
    let rho = right_unitor(&a).unwrap();
    assert!(zz.approx_eq(&rho, tolerance()), "zig-zag deviation {}", zz.max_deviation(&rho));
    assert!(inverse_1(&inv.inverse).unwrap() == *a);
    assert!(matches!(invert_1(&c.morphism(0, 2)), Err(crate::GerbeError::NotInvertible(2))));
}

#[test]
fn mate_of_identity_is_identity() {
    let mut c = chain(torus7(), 2, 2, 10);
    let a = c.morphism(0, 1);
    let m = mate(&identity_2(&a)).unwrap();
    let inv = Arc::new(inverse_1(&a).unwrap());
    assert!(m.approx_eq(&identity_2(&inv), tolerance()), "deviation {}", m.max_deviation(&identity_2(&inv)));
    let (_, b) = random_gauge_2(&a, &mut c.rng);
    let mb = mate(&b).unwrap();
    assert_ok(mb.validate());
}

#[test]
fn duality_laws() {
    let mut c = chain(torus7(), 3, 2, 11);
    let a = c.morphism(0, 2);
    let ap = c.morphism(1, 1);
    assert!(dual_1(&dual_1(&a)) == *a);
    let comp = compose_1(&ap, &a).unwrap();
    assert!(dual_1(&comp) == compose_1(&dual_1(&a), &dual_1(&ap)).unwrap());
    assert_ok(dual_1(&a).validate(true));
    let (_, b) = random_gauge_2(&a, &mut c.rng);
    let bd = dual_2(&b);
    assert_ok(bd.validate());
    assert!(dual_2(&bd).exactly_eq(&b));
    let (_, bp) = random_gauge_2(&ap, &mut c.rng);
    let lhs = dual_2(&horizontal(&bp, &b).unwrap());
    let rhs = horizontal(&dual_2(&b), &dual_2(&bp)).unwrap();
    assert!(lhs.approx_eq(&rhs, tolerance()), "deviation {}", lhs.max_deviation(&rhs));
}

#[test]
fn pullback_and_tensor() {
    let mut c = chain(grid_torus(3, 3), 3, 2, 12);
    let a = c.morphism(0, 1);
    let ap = c.morphism(1, 2);
    // fold of the 3×6 grid torus onto the 3×3 one
    let big = Arc::new(grid_torus(3, 6));
    let vmap = (0..18).map(|v| (v / 6) * 3 + (v % 6) % 3).collect();
    let f = crate::surface::SimplicialMap::new(big, a.cover().base().clone(), vmap).unwrap();
    let pa = pullback_1(&a, &f).unwrap();
    assert_ok(pa.validate(true));
    let lhs = pullback_1(&compose_1(&ap, &a).unwrap(), &f).unwrap();
    let rhs = compose_1(&pullback_1(&ap, &f).unwrap(), &pa).unwrap();
    assert!(lhs == rhs);
    let t = tensor_1(&a, &ap).unwrap();
    assert_ok(t.validate(true));
    let (_, b) = random_gauge_2(&a, &mut c.rng);
    let (_, bp) = random_gauge_2(&ap, &mut c.rng);
    let tb = tensor_2(&b, &bp).unwrap();
    assert_ok(tb.validate());
    let pb = pullback_2(&b, &f).unwrap();
    assert_ok(pb.validate());
    assert!(dual_2(&pb).exactly_eq(&pullback_2(&dual_2(&b), &f).unwrap()));
}
