//! Randomized invariants: surfaces and covers, gerbe data, the 2-category
//! and every holonomy flavour.

use gerbe_core::cli::axioms::identical;
use gerbe_core::cli::examples::{example, jandl_setup, Example, ExampleParams};
use gerbe_core::cli::commands::cmd_holonomy;
use gerbe_core::cli::scenario::{from_json, to_json};
use gerbe_core::holonomy::{
    holonomy_closed_seeded, holonomy_unoriented, jandl_morphism, jandl_transport, jandl_transport_2iso, jandl_validate,
};
use gerbe_core::linalg::cis;
use gerbe_core::random::{random_gauge_2, random_morphism, random_refinement, random_rho, random_trivialized, random_twist, twisted_rho};
use gerbe_core::surface::builders::{grid_torus, klein_bottle, octahedron, rp2, torus7};
use gerbe_core::surface::{domain_boundary, fundamental_domain, orientation_cover, SimplicialSurface, TriangleImage};
use gerbe_core::twocat::compose_1;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::sync::Arc;

const EPS: f64 = 1e-9;

fn closed(i: usize) -> SimplicialSurface {
    match i % 5 {
        0 => torus7(),
        1 => octahedron(),
        2 => rp2(),
        3 => klein_bottle(3, 3).unwrap(),
        _ => grid_torus(3, 3),
    }
}

fn oriented(i: usize) -> SimplicialSurface {
    match i % 3 {
        0 => torus7(),
        1 => octahedron(),
        _ => grid_torus(3, 4),
    }
}

fn unorientable(i: usize) -> SimplicialSurface {
    if i % 2 == 0 {
        rp2()
    } else {
        klein_bottle(3, 3).unwrap()
    }
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn orientation_cover_and_domains(surface in 0usize..5, seed in any::<u64>()) {
        let oc = orientation_cover(Arc::new(closed(surface))).unwrap();
        let (base, cov) = (&oc.base, &oc.cover);
        let k = oc.sigma.map();
        prop_assert_eq!(cov.n_triangles(), 2 * base.n_triangles());
        for v in 0..cov.n_vertices() {
            prop_assert_eq!(k.vertex(k.vertex(v)), v);
            prop_assert_eq!(oc.pr.vertex(k.vertex(v)), oc.pr.vertex(v));
        }
        for t in 0..cov.n_triangles() {
            match k.triangle(t) {
                TriangleImage::Triangle { tri, sign } => {
                    prop_assert_ne!(tri, t);
                    prop_assert_eq!(sign, -1);
                    prop_assert_eq!(oc.tri_base[tri], oc.tri_base[t]);
                }
                TriangleImage::Degenerate => prop_assert!(false, "σ collapses triangle {}", t),
            }
        }
        for (t, lifts) in oc.lifts.iter().enumerate() {
            prop_assert_ne!(lifts[0], lifts[1]);
            prop_assert!(lifts.iter().all(|&l| oc.tri_base[l] == t));
        }
        let f = fundamental_domain(&oc, seed);
        prop_assert!(f.is_valid(&oc));
        let tris: BTreeSet<usize> = f.triangles(&oc).into_iter().collect();
        prop_assert_eq!(tris.len(), base.n_triangles());
        prop_assert!(tris.iter().all(|&t| !tris.contains(&oc.sigma_triangle(t))));
        let cycles = domain_boundary(&oc, &f).unwrap();
        let mut seen = BTreeSet::new();
        for c in &cycles {
            for (a, b) in c.steps.iter().zip(c.steps.iter().cycle().skip(1)) {
                prop_assert_eq!(a.head(base), b.tail(base));
            }
            for s in &c.steps {
                prop_assert!(seen.insert(s.edge), "edge {} repeats", s.edge);
            }
        }
        if base.is_orientable() {
            prop_assert!(fundamental_domain(&oc, 0).boundary_edges(&oc).is_empty());
        }
    }

    #[test]
    fn gauge_gerbes_are_valid_and_dual_is_an_involution(surface in 0usize..5, n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Arc::new(closed(surface));
        let rho = random_rho(&base, &mut rng);
        let g = random_trivialized(base.clone(), n, &rho, &mut rng).gerbe;
        let h = random_trivialized(base, 2, &rho, &mut rng).gerbe;
        prop_assert!(g.validate().is_ok());
        prop_assert!(g.validate_t_mu().is_ok());
        prop_assert!(g.dual().dual() == *g);
        prop_assert!(g.dual().validate().is_ok());
        prop_assert!(g.tensor(&h).unwrap().validate().is_ok());
    }

    #[test]
    fn closed_holonomy_is_exp_i_integral_and_trivialization_independent(
        surface in 0usize..3, n in 1usize..=4, seed in any::<u64>(), s1 in 0u64..1000, s2 in 0u64..1000,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Arc::new(oriented(surface));
        let rho = random_rho(&base, &mut rng);
        let total: f64 = rho.iter().zip(base.orientation().unwrap()).map(|(r, &o)| r * o as f64).sum();
        let g = random_trivialized(base, n, &rho, &mut rng).gerbe;
        let (h1, h2) = (holonomy_closed_seeded(&g, s1).unwrap(), holonomy_closed_seeded(&g, s2).unwrap());
        prop_assert!((h1 - h2).norm() < EPS);
        prop_assert!((h1 - cis(total)).norm() < EPS);
    }

    #[test]
    fn holonomy_is_multiplicative_conjugates_under_duality_and_ignores_refinement(
        surface in 0usize..3, seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Arc::new(oriented(surface));
        let g = random_trivialized(base.clone(), 2, &random_rho(&base, &mut rng), &mut rng).gerbe;
        let h = random_trivialized(base, 3, &random_rho(&g.base().clone(), &mut rng), &mut rng).gerbe;
        let hol = |x: &Arc<_>| holonomy_closed_seeded(x, 1).unwrap();
        let gh = Arc::new(g.tensor(&h).unwrap());
        prop_assert!((hol(&gh) - hol(&g) * hol(&h)).norm() < EPS);
        prop_assert!((hol(&Arc::new(g.dual())) - hol(&g).conj()).norm() < EPS);
        let (cover, map) = random_refinement(g.cover(), &mut rng);
        let fine = Arc::new(g.refine(Arc::new(cover), &map).unwrap());
        prop_assert!(fine.validate().is_ok());
        prop_assert!((hol(&fine) - hol(&g)).norm() < EPS);
    }

    #[test]
    fn dbrane_holonomy_is_trivialization_independent(seed in 0u64..10_000, indices in 0usize..=3, rank in 1usize..=2, theta in -3.0f64..3.0) {
        let p = ExampleParams { theta, seed, indices, rank, ..ExampleParams::default() };
        let doc = example(Example::DiscBrane, &p).unwrap();
        let rec = cmd_holonomy(&doc, None, seed % 7, true).unwrap();
        prop_assert!(rec.independence.unwrap().ok);
    }

    #[test]
    fn scenarios_round_trip(which in 0usize..6, seed in 0u64..10_000, theta in -7.0f64..7.0, indices in 0usize..=3) {
        let name = [Example::Sphere, Example::Torus, Example::Klein, Example::Rp2, Example::DiscBrane, Example::RandomGauge][which];
        let doc = example(name, &ExampleParams { theta, seed, indices, ..ExampleParams::default() }).unwrap();
        let text = to_json(&doc);
        let back = from_json(&text).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(to_json(&back), text);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn composition_is_strictly_associative_and_d_is_a_cocycle(surface in 0usize..3, n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = Arc::new(oriented(surface));
        let mut rho = random_rho(&base, &mut rng);
        let mut gs = vec![random_trivialized(base.clone(), n, &rho, &mut rng)];
        let mut ms = Vec::new();
        for i in 0..3 {
            let t = random_twist(&base, &mut rng);
            rho = twisted_rho(&rho, &t);
            gs.push(random_trivialized(base.clone(), n, &rho, &mut rng));
            ms.push(Arc::new(random_morphism(&gs[i], &gs[i + 1], &t, 1 + i % 2, &mut rng).unwrap()));
        }
        for a in &ms {
            prop_assert!(a.validate(true).is_ok());
            prop_assert!(a.validate_d(usize::MAX).is_ok());
        }
        let left = compose_1(&compose_1(&ms[2], &ms[1]).unwrap(), &ms[0]).unwrap();
        let right = compose_1(&ms[2], &compose_1(&ms[1], &ms[0]).unwrap()).unwrap();
        prop_assert!(identical(&left, &right));
    }

    #[test]
    fn unoriented_holonomy_is_independent_of_domain_trivialization_and_sigma_gauge(
        surface in 0usize..2, eps_sign in prop::bool::ANY, seed in any::<u64>(), d1 in 0u64..50, d2 in 0u64..50,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eps = if eps_sign { 1.0 } else { -1.0 };
        let s = jandl_setup(unorientable(surface), 2, eps, surface == 0, &mut rng).unwrap();
        prop_assert!(jandl_validate(&s.gerbe, &s.j).is_ok());
        let (f1, f2) = (fundamental_domain(&s.oc, d1), fundamental_domain(&s.oc, d2));
        let h = holonomy_unoriented(&s.gerbe, &s.j, &s.oc, &f1, 0).unwrap();
        prop_assert!((holonomy_unoriented(&s.gerbe, &s.j, &s.oc, &f2, d1 + 1).unwrap() - h).norm() < EPS);
        if surface == 0 {
            prop_assert!((h - eps).norm() < EPS);
        }
        // a Jandl morphism J_B(J) → J_{B'}(J) induced by β: B ⇒ B'
        let iso = s.iso.clone().unwrap();
        let (iso_p, beta) = random_gauge_2(&iso, &mut rng);
        let (j1, j1p) = (jandl_transport(&iso, &s.j0).unwrap(), jandl_transport(&iso_p, &s.j0).unwrap());
        prop_assert!(jandl_morphism(&j1, &j1p, &jandl_transport_2iso(&beta, &s.j0).unwrap()).is_ok());
        let h1 = holonomy_unoriented(&s.gerbe, &j1, &s.oc, &f1, 0).unwrap();
        let h1p = holonomy_unoriented(&s.gerbe, &j1p, &s.oc, &f2, 0).unwrap();
        prop_assert!((h1 - h1p).norm() < EPS);
        prop_assert!((h1 - h).norm() < EPS);
    }
}
