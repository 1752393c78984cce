//! The ten acceptance criteria at their pinned tolerances, run in sequence
//! with one PASS/FAIL line each. Exits non-zero when any criterion fails.

use gerbe_core::cli::axioms::{bun_functor, descent, duality, invertibility, jandl_transport_laws, lemmas, two_category};
use gerbe_core::cli::examples::{brane_module, jandl_setup};
use gerbe_core::gerbe::BundleGerbe;
use gerbe_core::holonomy::{holonomy_closed_seeded, holonomy_dbrane, holonomy_unoriented, DBrane};
use gerbe_core::linalg::{cis, identity, random_unitary, CMat, C64};
use gerbe_core::random::{random_rho, random_trivialized};
use gerbe_core::report::Report;
use gerbe_core::surface::builders::{klein_bottle, rp2, square_disc, torus7};
use gerbe_core::surface::{boundary_complex, fundamental_domain, FundamentalDomain, OrientationCover, SimplicialMap, SimplicialSurface};
use gerbe_core::twocat::{compose_1, pullback_1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

const EPS: f64 = 1e-9;
const SEED: u64 = 0x5eed;

type Outcome = Result<String, String>;

fn suite(r: Report) -> Outcome {
    let checks: usize = r.laws.values().map(|l| l.checks).sum();
    let dev = r.laws.values().map(|l| l.max_deviation).fold(0.0, f64::max);
    let summary = format!("{} laws, {checks} checks, max deviation {dev:.1e}", r.laws.len());
    if r.is_ok() {
        Ok(summary)
    } else {
        let failed: Vec<String> =
            r.failed_laws().iter().map(|l| format!("{l} {:?}", r.laws[*l].locations)).collect();
        Err(format!("{summary}; failed: {}", failed.join("; ")))
    }
}

fn rng(offset: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED + offset)
}

fn require(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn two_category_axioms() -> Outcome {
    let t = Instant::now();
    let r = two_category(100, &mut rng(1));
    let elapsed = t.elapsed();
    let s = suite(r)?;
    require(elapsed < Duration::from_secs(60), || format!("{s}; took {elapsed:.1?}, over 60 s"))?;
    Ok(format!("{s}, {elapsed:.1?}"))
}

fn oriented_sum(base: &SimplicialSurface, rho: &[f64]) -> f64 {
    rho.iter().zip(base.orientation().unwrap()).map(|(r, &o)| r * o as f64).sum()
}

fn closed_holonomy() -> Outcome {
    let base = Arc::new(torus7());
    let mut worst: f64 = 0.0;
    for theta in [0.0, PI / 2.0, PI, 2.0 * PI] {
        let mut rho = vec![0.0; base.n_triangles()];
        rho[3] = theta * base.orientation().unwrap()[3] as f64;
        let g = Arc::new(BundleGerbe::trivial(base.clone(), &rho));
        let d = (holonomy_closed_seeded(&g, 0).map_err(|e| e.to_string())? - cis(theta)).norm();
        require(d <= EPS, || format!("θ = {theta}: deviation {d:.1e}"))?;
        worst = worst.max(d);
    }
    let mut r = rng(6);
    for case in 0..50 {
        let rho = random_rho(&base, &mut r);
        let n = r.random_range(2..=5);
        let g = random_trivialized(base.clone(), n, &rho, &mut r).gerbe;
        let want = cis(oriented_sum(&base, &rho));
        let h0 = holonomy_closed_seeded(&g, 0).map_err(|e| e.to_string())?;
        let h1 = holonomy_closed_seeded(&g, 1 + case).map_err(|e| e.to_string())?;
        let d = (h0 - want).norm().max((h1 - h0).norm());
        require(d <= EPS, || format!("gauge {case}: deviation {d:.1e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("4 values of θ, 50 gauges, 2 seeds each; max deviation {worst:.1e}"))
}

/// `tr ∏ U` around the disc boundary in its induced orientation, with `U`
/// indexed by the edges of the boundary complex.
fn direct_trace(disc: &SimplicialSurface, q: &SimplicialSurface, j: &SimplicialMap, u: &[CMat]) -> C64 {
    let pos = |v: usize| j.vertex_map().iter().position(|&w| w == v).unwrap();
    let cycle = &disc.boundary_cycles().unwrap()[0];
    let mut h = identity(u[0].nrows());
    for st in &cycle.steps {
        let (a, b) = (pos(st.tail(disc)), pos(st.head(disc)));
        let (e, _) = q.find_edge(a, b).unwrap();
        let forward = q.edge(e) == [a, b];
        h = if forward { &u[e] * h } else { u[e].adjoint() * h };
    }
    h.trace()
}

fn dbrane_holonomy() -> Outcome {
    let disc = Arc::new(square_disc());
    let (q, j) = boundary_complex(&disc).map_err(|e| e.to_string())?;
    let id = SimplicialMap::identity(disc.clone());
    let mut r = rng(7);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for rank in [1, 2] {
        for n in [1, 3] {
            for _ in 0..3 {
                let rho = random_rho(&disc, &mut r);
                let u: Vec<CMat> = (0..q.n_edges()).map(|_| random_unitary(&mut r, rank)).collect();
                let tg = random_trivialized(disc.clone(), n, &rho, &mut r);
                let e0 = brane_module(&Arc::new(tg.trivial.pullback(&j).unwrap()), &q, &u).map_err(|e| e.to_string())?;
                let module = if n == 1 {
                    e0
                } else {
                    Arc::new(compose_1(&e0, &pullback_1(&tg.iso, &j).unwrap()).map_err(|e| e.to_string())?)
                };
                let g = if n == 1 { tg.trivial.clone() } else { tg.gerbe.clone() };
                let brane = DBrane::new(&g, j.clone(), module).map_err(|e| e.to_string())?;
                let want = cis(oriented_sum(&disc, &rho)) * direct_trace(&disc, &q, &j, &u);
                for seed in [0, 1] {
                    let h = holonomy_dbrane(&g, &brane, &id, seed).map_err(|e| e.to_string())?;
                    let d = (h - want).norm();
                    require(d <= EPS, || format!("rank {rank}, {n} indices, seed {seed}: deviation {d:.1e}"))?;
                    worst = worst.max(d);
                }
                count += 1;
            }
        }
    }
    Ok(format!("{count} branes of rank 1 and 2, 2 seeds each; max deviation {worst:.1e}"))
}

/// Brute-force count on the 20-triangle sphere cover: a base edge is on
/// `∂F̄` when the chosen lifts of its two triangles disagree over it, and
/// twisted when the cover edge from the `+` lift of one end reaches the `−`
/// lift of the other. The descended line with sign `ε` contributes `ε` per
/// twisted edge.
fn rp2_oracle(oc: &OrientationCover, f: &FundamentalDomain, eps: f64) -> f64 {
    let (base, cover) = (&oc.base, &oc.cover);
    let chosen = |t: usize| cover.triangle(oc.lifts[t][f.choice[t] as usize]);
    let mut twisted = 0;
    for e in 0..base.n_edges() {
        let [a, b] = base.edge(e);
        let ts = base.edge_triangles(e);
        let over = |tri: [usize; 3]| {
            let x = *tri.iter().find(|&&c| c / 2 == a).unwrap();
            let y = *tri.iter().find(|&&c| c / 2 == b).unwrap();
            (x, y)
        };
        if over(chosen(ts[0])) != over(chosen(ts[1])) && cover.find_edge(2 * a, 2 * b + 1).is_some() {
            twisted += 1;
        }
    }
    if twisted % 2 == 0 {
        1.0
    } else {
        eps
    }
}

/// Holonomy of the two Jandl structures on `I_0` over RP², frozen from the oracle.
const RP2_FROZEN: [(f64, f64); 2] = [(1.0, 1.0), (-1.0, -1.0)];

fn unoriented_holonomy() -> Outcome {
    let mut worst: f64 = 0.0;
    for (eps, frozen) in RP2_FROZEN {
        for n in [0, 2] {
            let s = jandl_setup(rp2(), n, eps, true, &mut rng(8 + n as u64)).map_err(|e| e.to_string())?;
            require(s.oc.cover.n_triangles() == 20, || "RP² cover is not the 20-triangle sphere".into())?;
            for fseed in 0..5 {
                let f = fundamental_domain(&s.oc, fseed);
                let oracle = rp2_oracle(&s.oc, &f, eps);
                require(oracle == frozen, || format!("oracle gives {oracle} for ε = {eps}, domain {fseed}"))?;
                for tseed in 0..3 {
                    let h = holonomy_unoriented(&s.gerbe, &s.j, &s.oc, &f, tseed).map_err(|e| e.to_string())?;
                    let d = (h - frozen).norm();
                    require(d <= EPS, || format!("RP², ε = {eps}, {n} indices, domain {fseed}, seed {tseed}: {h}"))?;
                    worst = worst.max(d);
                }
            }
        }
    }
    let mut klein = Vec::new();
    for (i, eps) in [1.0, -1.0].into_iter().enumerate() {
        for n in [0, 2] {
            let s = jandl_setup(klein_bottle(3, 3).map_err(|e| e.to_string())?, n, eps, false, &mut rng(20 + i as u64))
                .map_err(|e| e.to_string())?;
            let cov = &s.oc.cover;
            require(cov.is_orientable() && cov.euler_characteristic() == 0, || "Klein cover is not a torus".into())?;
            let domains: Vec<FundamentalDomain> = [1, 2, 3].iter().map(|&d| fundamental_domain(&s.oc, d)).collect();
            require(domains[0] != domains[1] && domains[1] != domains[2] && domains[0] != domains[2], || {
                "fundamental domains coincide".into()
            })?;
            let h0 = holonomy_unoriented(&s.gerbe, &s.j, &s.oc, &domains[0], 0).map_err(|e| e.to_string())?;
            for (k, f) in domains.iter().enumerate() {
                for tseed in [0, 1] {
                    let h = holonomy_unoriented(&s.gerbe, &s.j, &s.oc, f, tseed).map_err(|e| e.to_string())?;
                    let d = (h - h0).norm();
                    require(d <= EPS, || format!("Klein, ε = {eps}, {n} indices, domain {k}, seed {tseed}: deviation {d:.1e}"))?;
                    worst = worst.max(d);
                }
            }
            klein.push(format!("{:.6}{:+.6}i", h0.re, h0.im));
        }
    }
    Ok(format!("RP² gives +1 and −1; Klein values [{}] over 3 domains; max deviation {worst:.1e}", klein.join(", ")))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("2-category axioms", two_category_axioms),
        ("lemma suite", || suite(lemmas(100, &mut rng(2)))),
        ("invertibility", || suite(invertibility(100, &mut rng(3)))),
        ("descent", || suite(descent(100, &mut rng(4)))),
        ("Bun functor", || suite(bun_functor(50, &mut rng(5)))),
        ("closed holonomy", closed_holonomy),
        ("D-brane holonomy", dbrane_holonomy),
        ("unoriented holonomy", unoriented_holonomy),
        ("duality identities", || suite(duality(20, &mut rng(9)))),
        ("Jandl transport", || suite(jandl_transport_laws(20, &mut rng(10)))),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
