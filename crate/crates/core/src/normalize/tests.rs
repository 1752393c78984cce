use super::*;
use crate::bundle::BundleMorphism;
use crate::linalg::cis;
use crate::random::{
    random_gauge_2, random_morphism, random_refinement, random_rho, random_trivialized, random_twist, refine_and_gauge,
    twist_morphism, twisted_rho, TrivializedGerbe, Twist,
};
use crate::site::Label;
use crate::surface::builders::*;
use crate::surface::{SimplicialMap, SimplicialSurface};
use crate::twocat::{dual_1, dual_2, horizontal, identity_1, mate, pullback_1, pullback_2, tensor_1, tensor_2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn assert_ok(r: Report) {
    assert!(r.is_ok(), "failed laws {:?}: {:#?}", r.failed_laws(), r);
}

fn pair(base: SimplicialSurface, cover: usize, seed: u64) -> (TrivializedGerbe, TrivializedGerbe, Twist, ChaCha8Rng) {
    let base = Arc::new(base);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rho = random_rho(&base, &mut rng);
    let tw = random_twist(&base, &mut rng);
    let g1 = random_trivialized(base.clone(), cover, &rho, &mut rng);
    let g2 = random_trivialized(base, cover, &twisted_rho(&rho, &tw), &mut rng);
    (g1, g2, tw, rng)
}

/// A morphism between trivial gerbes with a non-identity refinement.
fn trivial_morphism(base: &Arc<SimplicialSurface>, rank: usize, rng: &mut ChaCha8Rng) -> Arc<OneMorphism> {
    let rho = random_rho(base, rng);
    let tw = random_twist(base, rng);
    let i1 = Arc::new(BundleGerbe::trivial(base.clone(), &rho));
    let i2 = Arc::new(BundleGerbe::trivial(base.clone(), &twisted_rho(&rho, &tw)));
    let e = twist_morphism(&i1, &i2, &tw, rank, rng);
    Arc::new(refine_and_gauge(&e, rng))
}

fn as_bundle_morphism(b: &TwoMorphism) -> BundleMorphism {
    let nv = b.source().cover().base().n_vertices();
    BundleMorphism { matrices: vec![(0..nv).map(|v| Some(b.get(v, 0, 0).clone())).collect()] }
}

#[test]
fn fibre_product_form_is_left_alone() {
    let (g1, _, _, _) = pair(torus7(), 3, 1);
    let id = Arc::new(identity_1(&g1.gerbe));
    let n = normalize_1(&id).unwrap();
    assert!(Arc::ptr_eq(&n.fp, &id));
    assert!(n.iso.exactly_eq(&identity_2(&id)));
}

#[test]
fn normalization_round_trips() {
    let (g1, g2, tw, mut rng) = pair(torus7(), 3, 2);
    for rank in [1, 2] {
        let a = Arc::new(random_morphism(&g1, &g2, &tw, rank, &mut rng).unwrap());
        let n = normalize_1(&a).unwrap();
        let p = pair_cover(a.source(), a.target()).unwrap();
        assert!(is_fp(&n.fp, &p));
        assert_ok(n.fp.validate(true));
        assert_ok(n.iso.validate());
        assert_eq!(n.fp.rank(), a.rank());
        let inv = inverse_2(&n.iso).unwrap();
        assert!(vertical(&inv, &n.iso).unwrap().approx_eq(&identity_2(&n.fp), tolerance()));
        assert!(vertical(&n.iso, &inv).unwrap().approx_eq(&identity_2(&a), tolerance()));
        assert!(equivalent_rep_roundtrip(&n.iso));
    }
}

fn equivalent_rep_roundtrip(b: &TwoMorphism) -> bool {
    crate::twocat::equivalent_2(&b.to_rep(), &b.to_rep()).unwrap()
}

#[test]
fn duplicated_indices_keep_rank_and_curvature() {
    let (g1, g2, tw, mut rng) = pair(grid_torus(3, 3), 2, 3);
    let a = random_morphism(&g1, &g2, &tw, 2, &mut rng).unwrap();
    // a second refinement on top of the first one duplicates indices further
    let a = Arc::new(refine_and_gauge(&a, &mut rng));
    let n = normalize_1(&a).unwrap();
    let p = pair_cover(a.source(), a.target()).unwrap();
    let base = a.cover().base().clone();
    for t in 0..base.n_triangles() {
        for &k in a.cover().at_triangle(t) {
            let q = p.index[&(a.s()[k], a.t()[k])];
            assert_eq!(n.fp.bundle().trace_curv(q, t), a.bundle().trace_curv(k, t));
        }
    }
}

#[test]
fn normalization_commutes_with_composition() {
    let base = Arc::new(torus7());
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut rho = random_rho(&base, &mut rng);
    let mut gs = vec![random_trivialized(base.clone(), 2, &rho, &mut rng)];
    let mut tws = Vec::new();
    for _ in 0..2 {
        let tw = random_twist(&base, &mut rng);
        rho = twisted_rho(&rho, &tw);
        gs.push(random_trivialized(base.clone(), 2, &rho, &mut rng));
        tws.push(tw);
    }
    let a1 = Arc::new(random_morphism(&gs[0], &gs[1], &tws[0], 1, &mut rng).unwrap());
    let a2 = Arc::new(random_morphism(&gs[1], &gs[2], &tws[1], 2, &mut rng).unwrap());
    let n1 = normalize_1(&a1).unwrap();
    let n2 = normalize_1(&a2).unwrap();
    let c = Arc::new(compose_1(&a2, &a1).unwrap());
    let nc = normalize_1(&c).unwrap();
    let cn = Arc::new(compose_1(&n2.fp, &n1.fp).unwrap());
    let ncn = normalize_1(&cn).unwrap();
    // S_{A₂∘A₁} ⇒ A₂∘A₁ ⇐ S₂∘S₁ ⇐ S_{S₂∘S₁}
    let h = horizontal(&n2.iso, &n1.iso).unwrap();
    let link = vertical(&inverse_2(&nc.iso).unwrap(), &vertical(&h, &ncn.iso).unwrap()).unwrap();
    assert_ok(link.validate());
    assert_eq!(ncn.fp.cover(), nc.fp.cover());
}

fn double(rep: &TwoMorphismRep) -> TwoMorphismRep {
    let w = &rep.w;
    let mut labels: Vec<Label> = Vec::new();
    let mut supports = Vec::new();
    for copy in ["a", "b"] {
        for i in 0..w.len() {
            let mut l = w.label(i).clone();
            l.push(copy.to_string());
            labels.push(l);
            supports.push(w.support(i).clone());
        }
    }
    let n = w.len();
    let legs = [0, 1].map(|s| (0..2 * n).map(|i| rep.legs[s][i % n]).collect());
    let mut beta = BTreeMap::new();
    for (&(v, i), m) in &rep.beta {
        beta.insert((v, i), m.clone());
        beta.insert((v, i + n), m.clone());
    }
    TwoMorphismRep {
        source: rep.source.clone(),
        target: rep.target.clone(),
        w: Arc::new(Cover::unchecked(w.base().clone(), labels, supports)),
        legs,
        beta,
    }
}

#[test]
fn doubled_refinement_normalizes_to_the_same_matrices() {
    let (g1, g2, tw, mut rng) = pair(torus7(), 2, 5);
    let a = Arc::new(random_morphism(&g1, &g2, &tw, 2, &mut rng).unwrap());
    let (_, b) = random_gauge_2(&a, &mut rng);
    let rep = b.to_rep();
    let once = normalize_2(&rep).unwrap();
    let twice = normalize_2(&double(&rep)).unwrap();
    assert_ok(once.report.clone());
    assert_ok(twice.report.clone());
    assert!(once.beta.approx_eq(&twice.beta, tolerance()));
    assert!(crate::twocat::equivalent_2(&rep, &double(&rep)).unwrap());

    let mut bad = double(&rep);
    let key = *bad.beta.keys().last().unwrap();
    bad.beta.insert(key, bad.beta[&key].clone() * cis(0.3));
    assert!(matches!(normalize_2(&bad), Err(GerbeError::DescentObstruction(_))));
}

#[test]
fn equivalent_reps_share_a_canonical_form() {
    let (g1, g2, tw, mut rng) = pair(torus7(), 3, 6);
    let a = Arc::new(random_morphism(&g1, &g2, &tw, 1, &mut rng).unwrap());
    let (_, b) = random_gauge_2(&a, &mut rng);
    // refine the representative's cover and pull the values back
    let rep = b.to_rep();
    let (w2, map) = random_refinement(&rep.w, &mut rng);
    let refined = TwoMorphismRep {
        source: rep.source.clone(),
        target: rep.target.clone(),
        legs: [0, 1].map(|s| map.iter().map(|&i| rep.legs[s][i]).collect()),
        beta: {
            let mut m = BTreeMap::new();
            for v in 0..w2.base().n_vertices() {
                for &i in w2.at_vertex(v) {
                    m.insert((v, i), rep.beta[&(v, map[i])].clone());
                }
            }
            m
        },
        w: Arc::new(w2),
    };
    let x = normalize_2(&rep).unwrap();
    let y = normalize_2(&refined).unwrap();
    assert!(x.beta.approx_eq(&y.beta, tolerance()));
}

#[test]
fn bun_curvature_is_forced_exactly() {
    let base = Arc::new(torus7());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let a = trivial_morphism(&base, 3, &mut rng);
    let b = bun(&a).unwrap();
    let (r1, r2) = (a.source().trivial_rho().unwrap(), a.target().trivial_rho().unwrap());
    for t in 0..base.n_triangles() {
        assert_eq!(b.bundle.trace_curv(0, t), 3.0 * (r2[t] - r1[t]));
    }
    assert!(b.bundle.check().is_ok());
}

#[test]
fn bun_rejects_nontrivial_ends() {
    let (g1, g2, tw, mut rng) = pair(torus7(), 2, 8);
    let a = Arc::new(random_morphism(&g1, &g2, &tw, 1, &mut rng).unwrap());
    assert!(matches!(bun(&a), Err(GerbeError::NotTrivialGerbe)));
}

#[test]
fn bun_laws() {
    let base = Arc::new(grid_torus(3, 4));
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..3 {
        let a = trivial_morphism(&base, 1, &mut rng);
        let na = normalize_1(&a).unwrap();
        let ra = na.fp.bundle().clone();

        // unit
        let id = Arc::new(identity_1(a.source()));
        let rid = bun(&id).unwrap().bundle;
        assert_eq!(rid.max_deviation(&DiscreteBundle::trivial(rid.cover().clone(), 1)), 0.0);

        // composition: Bun(A₂∘A₁) ≅ Bun(A₁) ⊗ Bun(A₂)
        let tw = random_twist(&base, &mut rng);
        let i3 = Arc::new(BundleGerbe::trivial(base.clone(), &twisted_rho(&a.target().trivial_rho().unwrap(), &tw)));
        let a2 = Arc::new(refine_and_gauge(&twist_morphism(a.target(), &i3, &tw, 1, &mut rng), &mut rng));
        let n2 = normalize_1(&a2).unwrap();
        let c = Arc::new(compose_1(&a2, &a).unwrap());
        let nc = normalize_1(&c).unwrap();
        let cn = Arc::new(compose_1(&n2.fp, &na.fp).unwrap());
        let link = vertical(&inverse_2(&horizontal(&n2.iso, &na.iso).unwrap()).unwrap(), &nc.iso).unwrap();
        // transports agree exactly; forced curvatures differ by rounding of ρ₃−ρ₁ vs (ρ₂−ρ₁)+(ρ₃−ρ₂)
        assert!(cn.bundle().max_deviation(&ra.tensor(n2.fp.bundle()).unwrap()) < 1e-12);
        as_bundle_morphism(&link).check(nc.fp.bundle(), cn.bundle()).unwrap();

        // inverse ↦ dual
        let inv = Arc::new(inverse_1(&a).unwrap());
        let ninv = normalize_1(&inv).unwrap();
        let sinv = Arc::new(inverse_1(&na.fp).unwrap());
        assert_eq!(sinv.bundle().max_deviation(&ra.dual()), 0.0);
        let link = vertical(&mate(&na.iso).unwrap(), &ninv.iso).unwrap();
        assert!(**link.target() == *sinv);
        as_bundle_morphism(&link).check(ninv.fp.bundle(), &ra.dual()).unwrap();

        // tensor
        let b = trivial_morphism(&base, 1, &mut rng);
        let nb = normalize_1(&b).unwrap();
        let t = Arc::new(tensor_1(&a, &b).unwrap());
        let nt = normalize_1(&t).unwrap();
        let st = tensor_2(&na.iso, &nb.iso).unwrap();
        let link = vertical(&inverse_2(&st).unwrap(), &nt.iso).unwrap();
        assert!(st.source().bundle().max_deviation(&ra.tensor(nb.fp.bundle()).unwrap()) < 1e-12);
        as_bundle_morphism(&link).check(nt.fp.bundle(), st.source().bundle()).unwrap();

        // pullback along a fold of a finer torus
        let fine = Arc::new(grid_torus(3, 8));
        let f = SimplicialMap::new(fine.clone(), base.clone(), (0..24).map(|v| (v / 8) * 4 + (v % 8) % 4).collect()).unwrap();
        let pa = Arc::new(pullback_1(&a, &f).unwrap());
        let npa = normalize_1(&pa).unwrap();
        let ps = pullback_2(&na.iso, &f).unwrap();
        let link = vertical(&inverse_2(&ps).unwrap(), &npa.iso).unwrap();
        let pulled = ra.pullback(&f, ps.source().cover().clone()).unwrap();
        assert_eq!(ps.source().bundle().max_deviation(&pulled), 0.0);
        as_bundle_morphism(&link).check(npa.fp.bundle(), &pulled).unwrap();

        // dual ↦ same bundle
        let d = Arc::new(dual_1(&a));
        let nd = normalize_1(&d).unwrap();
        let ds = dual_2(&na.iso);
        assert_eq!(ds.source().bundle().max_deviation(&ra), 0.0);
        let link = vertical(&inverse_2(&ds).unwrap(), &nd.iso).unwrap();
        as_bundle_morphism(&link).check(nd.fp.bundle(), &ra).unwrap();
    }
}

#[test]
fn bun_is_functorial_on_2_morphisms() {
    let base = Arc::new(torus7());
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a = trivial_morphism(&base, 2, &mut rng);
    let (a2, b1) = random_gauge_2(&a, &mut rng);
    let (_, b2) = random_gauge_2(&a2, &mut rng);
    let m1 = bun_2(&b1).unwrap();
    let m2 = bun_2(&b2).unwrap();
    let m = bun_2(&vertical(&b2, &b1).unwrap()).unwrap();
    assert!(m.max_deviation(&m1.then(&m2)) < 1e-9);
    m.check(&bun(&a).unwrap().bundle, &bun(b2.target()).unwrap().bundle).unwrap();
}

/// A flat line on a grid torus with holonomy `e^{iθ}` around the `i`-cycle.
fn seam_line(base: &Arc<SimplicialSurface>, m: usize, n: usize, theta: f64) -> DiscreteBundle {
    let cover = Arc::new(Cover::trivial(base.clone()));
    let row = |v: usize| v / n;
    let transport = vec![(0..base.n_edges())
        .map(|e| {
            let [a, b] = base.edge(e);
            let x = if row(a) == m - 1 && row(b) == 0 {
                theta
            } else if row(a) == 0 && row(b) == m - 1 {
                -theta
            } else {
                0.0
            };
            Some(scalar(cis(x)))
        })
        .collect()];
    let tc = vec![vec![Some(0.0); base.n_triangles()]];
    let b = DiscreteBundle::from_parts(cover, 1, transport, tc);
    b.check().unwrap();
    b
}

#[test]
fn flat_lines_act_freely_on_isomorphisms() {
    let base = Arc::new(grid_torus(3, 3));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let rho = random_rho(&base, &mut rng);
    let g = random_trivialized(base.clone(), 2, &rho, &mut rng);
    let a = Arc::new(identity_1(&g.gerbe));
    let twisted = Arc::new(twist_by_flat_line(&a, &seam_line(&base, 3, 3, 0.7)).unwrap());
    assert!(solve_2iso(&a, &twisted).is_none());
    let untwisted = Arc::new(twist_by_flat_line(&a, &seam_line(&base, 3, 3, 2.0 * std::f64::consts::PI)).unwrap());
    let b = solve_2iso(&a, &untwisted).expect("trivial holonomy gives a 2-isomorphism");
    assert_ok(b.validate());
}

#[test]
fn solver_recovers_gauge_2_isomorphisms() {
    let (g1, g2, tw, mut rng) = pair(torus7(), 3, 12);
    let a = Arc::new(random_morphism(&g1, &g2, &tw, 1, &mut rng).unwrap());
    let (a2, b) = random_gauge_2(&a, &mut rng);
    let s = solve_2iso(&a, &a2).unwrap();
    // unique up to one constant on a connected base
    let (&k, x) = b.canon().iter().next().unwrap();
    let c = x[(0, 0)] / s.canon()[&k][(0, 0)];
    for (key, m) in s.canon() {
        assert!((m[(0, 0)] * c - b.canon()[key][(0, 0)]).norm() < 1e-9);
    }
}

#[test]
fn stable_isomorphism() {
    let base = Arc::new(torus7());
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let rho = random_rho(&base, &mut rng);
    let g = random_trivialized(base.clone(), 3, &rho, &mut rng);
    let iso = stably_isomorphic(&g.gerbe, &g.gerbe).unwrap().unwrap();
    assert_ok(iso.validate(true));
    let p = pair_cover(&g.gerbe, &g.gerbe).unwrap();
    assert!(is_fp(&iso, &p));

    let i_rho = Arc::new(BundleGerbe::trivial(base.clone(), &rho));
    let iso = stably_isomorphic(&g.gerbe, &i_rho).unwrap().unwrap();
    assert_ok(iso.validate(true));

    // an exact shift ρ + dλ
    let lambda: Vec<f64> = (0..base.n_edges()).map(|e| 0.1 * e as f64 - 0.4).collect();
    let shifted: Vec<f64> = (0..base.n_triangles())
        .map(|t| rho[t] + base.triangle_edges(t).iter().map(|&(e, s)| s as f64 * lambda[e]).sum::<f64>())
        .collect();
    let i_shift = Arc::new(BundleGerbe::trivial(base.clone(), &shifted));
    assert!(stably_isomorphic(&i_rho, &i_shift).unwrap().is_some());

    // total π apart: no isomorphism
    let mut half = vec![0.0; base.n_triangles()];
    half[0] = std::f64::consts::PI * base.orientation().unwrap()[0] as f64;
    let i0 = Arc::new(BundleGerbe::trivial(base.clone(), &vec![0.0; base.n_triangles()]));
    let ipi = Arc::new(BundleGerbe::trivial(base.clone(), &half));
    assert!(stably_isomorphic(&i0, &ipi).unwrap().is_none());
    let (h0, hpi) = (crate::holonomy::holonomy_closed(&i0).unwrap(), crate::holonomy::holonomy_closed(&ipi).unwrap());
    assert!((h0 - hpi).norm() > 1.0);
}
