//! Randomized property suites over desk-scale instances: covers with at
//! most five indices on surfaces with at most 30 triangles. Every suite
//! returns a report with one law per checked identity.

use super::examples::jandl_setup;
use crate::bundle::BundleMorphism;
use crate::error::Result;
use crate::gerbe::BundleGerbe;
use crate::holonomy::{
    holonomy_closed_seeded, jandl_equivalent, jandl_morphism, jandl_transport, jandl_transport_2iso, jandl_validate,
};
use crate::linalg::tolerance;
use crate::normalize::{bun, is_fp, normalize_1, normalize_2, pair_cover};
use crate::random::{
    random_gauge_2, random_morphism, random_rho, random_trivialized, random_twist, refine_and_gauge, refine_rep,
    twist_morphism, twisted_rho, TrivializedGerbe, Twist,
};
use crate::report::Report;
use crate::site::fiber_product;
use crate::surface::builders::*;
use crate::surface::{SimplicialMap, SimplicialSurface};
use crate::twocat::{
    compose_1, dual_1, dual_2, equivalent_2, horizontal, identity_1, identity_2, inverse_1, inverse_2, invert_1,
    left_unitor, mate, pullback_1, pullback_2, right_unitor, tensor_1, tensor_2, vertical, OneMorphism, TwoMorphism,
};
use crate::GerbeError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const MAX_INDICES: usize = 5;

/// Desk surfaces, all with at most 30 triangles.
pub fn desk_surfaces() -> Vec<SimplicialSurface> {
    vec![torus7(), octahedron(), grid_torus(3, 3), rp2(), grid_torus(3, 4), klein_bottle(3, 3).unwrap(), square_disc()]
}

/// Closed oriented desk surfaces.
pub fn closed_oriented_surfaces() -> Vec<SimplicialSurface> {
    vec![torus7(), octahedron(), grid_torus(3, 3), grid_torus(3, 4)]
}

struct Chain {
    g: Vec<TrivializedGerbe>,
    tw: Vec<Twist>,
}

fn chain(base: &Arc<SimplicialSurface>, len: usize, n: usize, rng: &mut ChaCha8Rng) -> Chain {
    let mut rho = random_rho(base, rng);
    let mut g = vec![random_trivialized(base.clone(), n, &rho, rng)];
    let mut tw = Vec::new();
    for _ in 1..len {
        let t = random_twist(base, rng);
        rho = twisted_rho(&rho, &t);
        g.push(random_trivialized(base.clone(), n, &rho, rng));
        tw.push(t);
    }
    Chain { g, tw }
}

impl Chain {
    fn morphism(&self, i: usize, rank: usize, rng: &mut ChaCha8Rng) -> Result<Arc<OneMorphism>> {
        Ok(Arc::new(random_morphism(&self.g[i], &self.g[i + 1], &self.tw[i], rank, rng)?))
    }
}

/// Runs a check that yields a deviation; construction errors count as failures.
fn attempt(r: &mut Report, law: &str, case: usize, f: impl FnOnce() -> Result<f64>) {
    match f() {
        Ok(d) => r.record(law, d, tolerance(), || format!("case {case}")),
        Err(e) => r.record(law, f64::INFINITY, 0.0, || format!("case {case}: {e}")),
    }
}

fn exact(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Materialized `α` values compared per call of [`identical`], beyond the diagonal.
const ALPHA_BUDGET: usize = 20_000;

/// Refinement, bundle and factor chain agree bit for bit. The chain
/// determines every `α`; the materialized values are cross-checked on the
/// diagonal and on an evenly strided subset of the off-diagonal pairs.
pub fn identical(a: &OneMorphism, b: &OneMorphism) -> bool {
    if a != b || **a.cover() != **b.cover() || a.bundle() != b.bundle() || a.s() != b.s() || a.t() != b.t() {
        return false;
    }
    let z = a.cover();
    let n_v = z.base().n_vertices();
    let total: usize = (0..n_v).map(|v| z.at_vertex(v).len().pow(2)).sum();
    let stride = total.div_ceil(ALPHA_BUDGET).max(1);
    let mut i = 0usize;
    (0..n_v).all(|v| {
        let at = z.at_vertex(v);
        at.iter().all(|&k| {
            at.iter().all(|&kp| {
                i += 1;
                (k != kp && i % stride != 0) || a.alpha(v, k, kp) == b.alpha(v, k, kp)
            })
        })
    })
}

fn pick(case: usize, rng: &mut ChaCha8Rng, surfaces: &[SimplicialSurface]) -> (Arc<SimplicialSurface>, usize) {
    let base = Arc::new(surfaces[case % surfaces.len()].clone());
    (base, rng.random_range(1..=MAX_INDICES))
}

/// (2C1) exact associativity, (2C2) unitor coherence, functoriality of
/// horizontal composition and the interchange law.
pub fn two_category(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let surfaces = desk_surfaces();
    let mut r = Report::new();
    for case in 0..cases {
        let (base, n) = pick(case, rng, &surfaces);
        let c = chain(&base, 4, n, rng);
        let ranks: Vec<usize> = (0..3).map(|_| rng.random_range(1..=2)).collect();
        let ms: Result<Vec<_>> = (0..3).map(|i| c.morphism(i, ranks[i], rng)).collect();
        let Ok(ms) = ms else {
            r.record("construction", f64::INFINITY, 0.0, || format!("case {case}"));
            continue;
        };
        let (a1, a2, a3) = (&ms[0], &ms[1], &ms[2]);
        attempt(&mut r, "1-morphism axioms", case, || Ok(exact(a1.validate(true).is_ok())));
        attempt(&mut r, "2C1 associativity (exact)", case, || {
            let left = compose_1(&compose_1(a3, a2)?, a1)?;
            let right = compose_1(a3, &compose_1(a2, a1)?)?;
            Ok(exact(identical(&left, &right)))
        });
        attempt(&mut r, "2C2 unitor coherence", case, || {
            let x = horizontal(&identity_2(a2), &right_unitor(a1)?)?;
            let y = horizontal(&left_unitor(a2)?, &identity_2(a1))?;
            Ok(if equivalent_2(&x.to_rep(), &y.to_rep())? { x.max_deviation(&y) } else { f64::INFINITY })
        });
        attempt(&mut r, "horizontal identities", case, || {
            let ids = horizontal(&identity_2(a2), &identity_2(a1))?;
            Ok(ids.max_deviation(&identity_2(&Arc::new(compose_1(a2, a1)?))))
        });
        attempt(&mut r, "interchange", case, || {
            let (a1p, b1) = random_gauge_2(a1, rng);
            let (_, b1p) = random_gauge_2(&a1p, rng);
            let (a2p, b2) = random_gauge_2(a2, rng);
            let (_, b2p) = random_gauge_2(&a2p, rng);
            let lhs = horizontal(&vertical(&b2p, &b2)?, &vertical(&b1p, &b1)?)?;
            let rhs = vertical(&horizontal(&b2p, &b1p)?, &horizontal(&b2, &b1)?)?;
            Ok(lhs.max_deviation(&rhs))
        });
    }
    r
}

/// `t_μ` identities on every gerbe and the `d_A` cocycle and square on
/// every generated 1-morphism.
pub fn lemmas(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let surfaces = desk_surfaces();
    let mut r = Report::new();
    for case in 0..cases {
        let (base, n) = pick(case, rng, &surfaces);
        let c = chain(&base, 2, n, rng);
        r.merge(c.g[0].gerbe.validate_t_mu());
        r.merge(c.g[1].gerbe.validate_t_mu());
        let rank = rng.random_range(1..=3);
        match c.morphism(0, rank, rng) {
            Ok(a) => r.merge(a.validate_d(usize::MAX).prefixed("d_A: ")),
            Err(e) => r.record("construction", f64::INFINITY, 0.0, || format!("case {case}: {e}")),
        }
    }
    r
}

/// `invert_1` with the zig-zag on rank 1, `NotInvertible` on higher ranks.
pub fn invertibility(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let surfaces = desk_surfaces();
    let mut r = Report::new();
    for case in 0..cases {
        let (base, n) = pick(case, rng, &surfaces);
        let c = chain(&base, 2, n, rng);
        let rank = if case % 2 == 0 { 1 } else { rng.random_range(2..=3) };
        let a = match c.morphism(0, rank, rng) {
            Ok(a) => a,
            Err(e) => {
                r.record("construction", f64::INFINITY, 0.0, || format!("case {case}: {e}"));
                continue;
            }
        };
        if rank == 1 {
            attempt(&mut r, "zig-zag", case, || {
                let inv = invert_1(&a)?;
                let s1 = horizontal(&inv.i_r, &identity_2(&a))?;
                let s2 = horizontal(&identity_2(&a), &inv.i_l)?;
                let zz = vertical(&left_unitor(&a)?, &vertical(&s2, &s1)?)?;
                Ok(zz.max_deviation(&right_unitor(&a)?))
            });
        } else {
            let raised = matches!(invert_1(&a), Err(GerbeError::NotInvertible(k)) if k == rank);
            r.require("rank >= 2 not invertible", raised, || format!("case {case}"));
        }
    }
    r
}

/// `normalize_1` round trips through `equivalent_2`; `normalize_2` gives
/// the same canonical matrices for equivalent representatives.
pub fn descent(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let surfaces = desk_surfaces();
    let mut r = Report::new();
    for case in 0..cases {
        let (base, n) = pick(case, rng, &surfaces);
        let c = chain(&base, 2, n, rng);
        let rank = rng.random_range(1..=2);
        let a = match c.morphism(0, rank, rng) {
            Ok(a) => a,
            Err(e) => {
                r.record("construction", f64::INFINITY, 0.0, || format!("case {case}: {e}"));
                continue;
            }
        };
        attempt(&mut r, "normalize_1 round trip", case, || {
            let nz = normalize_1(&a)?;
            let p = pair_cover(a.source(), a.target())?;
            if !is_fp(&nz.fp, &p) || !nz.iso.validate().is_ok() {
                return Ok(f64::INFINITY);
            }
            let inv = inverse_2(&nz.iso)?;
            let there = vertical(&inv, &nz.iso)?;
            let back = vertical(&nz.iso, &inv)?;
            let ok = equivalent_2(&there.to_rep(), &identity_2(&nz.fp).to_rep())?
                && equivalent_2(&back.to_rep(), &identity_2(&a).to_rep())?;
            Ok(if ok { there.max_deviation(&identity_2(&nz.fp)).max(back.max_deviation(&identity_2(&a))) } else { f64::INFINITY })
        });
        attempt(&mut r, "normalize_2 canonical matrices", case, || {
            let (_, b) = random_gauge_2(&a, rng);
            let rep = b.to_rep();
            let x = normalize_2(&rep)?;
            let y = normalize_2(&refine_rep(&rep, rng))?;
            if !x.report.is_ok() || !y.report.is_ok() {
                return Ok(f64::INFINITY);
            }
            Ok(x.beta.max_deviation(&y.beta))
        });
    }
    r
}

fn as_bundle_morphism(b: &TwoMorphism) -> BundleMorphism {
    let nv = b.source().cover().base().n_vertices();
    BundleMorphism { matrices: vec![(0..nv).map(|v| Some(b.get(v, 0, 0).clone())).collect()] }
}

/// A morphism between trivial gerbes with a non-identity refinement.
fn trivial_morphism(base: &Arc<SimplicialSurface>, rank: usize, rng: &mut ChaCha8Rng) -> Arc<OneMorphism> {
    let rho = random_rho(base, rng);
    let tw = random_twist(base, rng);
    let i1 = Arc::new(BundleGerbe::trivial(base.clone(), &rho));
    let i2 = Arc::new(BundleGerbe::trivial(base.clone(), &twisted_rho(&rho, &tw)));
    Arc::new(refine_and_gauge(&twist_morphism(&i1, &i2, &tw, rank, rng), rng))
}

fn check_link(link: &TwoMorphism, src: &crate::bundle::DiscreteBundle, tgt: &crate::bundle::DiscreteBundle) -> f64 {
    exact(as_bundle_morphism(link).check(src, tgt).is_ok())
}

/// The laws of `Bun`: unit, composition, inverse, tensor, pullback, dual,
/// and the exact forced curvature.
pub fn bun_functor(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let base = Arc::new(grid_torus(3, 4));
    let fine = Arc::new(grid_torus(3, 8));
    let fold = SimplicialMap::new(fine, base.clone(), (0..24).map(|v| (v / 8) * 4 + (v % 8) % 4).collect()).unwrap();
    let mut r = Report::new();
    for case in 0..cases {
        let rank = 1 + case % 3;
        let a = trivial_morphism(&base, rank, rng);
        attempt(&mut r, "Bun curvature n(rho2 - rho1) exact", case, || {
            let bd = bun(&a)?.bundle;
            let (r1, r2) = (a.source().require_trivial()?, a.target().require_trivial()?);
            let ok = (0..base.n_triangles()).all(|t| bd.trace_curv(0, t) == rank as f64 * (r2[t] - r1[t]));
            Ok(exact(ok && bd.check().is_ok()))
        });
        attempt(&mut r, "Bun (a) unit", case, || {
            let rid = bun(&Arc::new(identity_1(a.source())))?.bundle;
            Ok(rid.max_deviation(&crate::bundle::DiscreteBundle::trivial(rid.cover().clone(), 1)))
        });
        let Ok(na) = normalize_1(&a) else {
            r.record("normalize", f64::INFINITY, 0.0, || format!("case {case}"));
            continue;
        };
        let ra = na.fp.bundle().clone();
        attempt(&mut r, "Bun composition", case, || {
            let tw = random_twist(&base, rng);
            let i3 = Arc::new(BundleGerbe::trivial(base.clone(), &twisted_rho(&a.target().require_trivial()?, &tw)));
            let a2 = Arc::new(refine_and_gauge(&twist_morphism(a.target(), &i3, &tw, 1, rng), rng));
            let n2 = normalize_1(&a2)?;
            let nc = normalize_1(&Arc::new(compose_1(&a2, &a)?))?;
            let cn = compose_1(&n2.fp, &na.fp)?;
            let link = vertical(&inverse_2(&horizontal(&n2.iso, &na.iso)?)?, &nc.iso)?;
            let dev = cn.bundle().max_deviation(&ra.tensor(n2.fp.bundle())?);
            Ok(dev.max(check_link(&link, nc.fp.bundle(), cn.bundle())))
        });
        if rank == 1 {
            attempt(&mut r, "Bun (b) inverse", case, || {
                let ninv = normalize_1(&Arc::new(inverse_1(&a)?))?;
                let link = vertical(&mate(&na.iso)?, &ninv.iso)?;
                let sinv = inverse_1(&na.fp)?;
                let dev = sinv.bundle().max_deviation(&ra.dual());
                Ok(dev.max(check_link(&link, ninv.fp.bundle(), &ra.dual())))
            });
        }
        attempt(&mut r, "Bun (c) tensor", case, || {
            let b = trivial_morphism(&base, 1, rng);
            let nb = normalize_1(&b)?;
            let nt = normalize_1(&Arc::new(tensor_1(&a, &b)?))?;
            let st = tensor_2(&na.iso, &nb.iso)?;
            let link = vertical(&inverse_2(&st)?, &nt.iso)?;
            let dev = st.source().bundle().max_deviation(&ra.tensor(nb.fp.bundle())?);
            Ok(dev.max(check_link(&link, nt.fp.bundle(), st.source().bundle())))
        });
        attempt(&mut r, "Bun (d) pullback", case, || {
            let npa = normalize_1(&Arc::new(pullback_1(&a, &fold)?))?;
            let ps = pullback_2(&na.iso, &fold)?;
            let link = vertical(&inverse_2(&ps)?, &npa.iso)?;
            let pulled = ra.pullback(&fold, ps.source().cover().clone())?;
            let dev = ps.source().bundle().max_deviation(&pulled);
            Ok(dev.max(check_link(&link, npa.fp.bundle(), &pulled)))
        });
        attempt(&mut r, "Bun (e) dual", case, || {
            let nd = normalize_1(&Arc::new(dual_1(&a)))?;
            let ds = dual_2(&na.iso);
            let link = vertical(&inverse_2(&ds)?, &nd.iso)?;
            let dev = ds.source().bundle().max_deviation(&ra);
            Ok(dev.max(check_link(&link, nd.fp.bundle(), &ra)))
        });
    }
    r
}

/// `(G ⊗ H)*` against `H* ⊗ G*` with the fibre-product indices swapped, bit for bit.
pub fn dual_of_tensor_matches(g: &BundleGerbe, h: &BundleGerbe) -> Result<bool> {
    let lhs = g.tensor(h)?.dual();
    let rhs = h.dual().tensor(&g.dual())?;
    let (_, l) = fiber_product(&[g.cover(), h.cover()])?;
    let (_, rl) = fiber_product(&[h.cover(), g.cover()])?;
    let swap: std::collections::HashMap<(usize, usize), usize> = (0..rl[0].len()).map(|q| ((rl[1][q], rl[0][q]), q)).collect();
    let perm: Vec<usize> = (0..l[0].len()).map(|p| swap[&(l[0][p], l[1][p])]).collect();
    let same_support = (0..perm.len()).all(|p| lhs.cover().support(p) == rhs.cover().support(perm[p]));
    let c = lhs.c_map().iter().all(|(&(p, t), &x)| rhs.c_map().get(&(perm[p], t)) == Some(&x));
    let u = lhs.u_map().iter().all(|(&(p, q, e), &x)| rhs.u_map().get(&(perm[p], perm[q], e)) == Some(&x));
    let lc = lhs.l_curv_map().iter().all(|(&(p, q, t), &x)| rhs.l_curv_map().get(&(perm[p], perm[q], t)) == Some(&x));
    let mu = lhs.mu_map().iter().all(|(&(v, p, q, s), &x)| rhs.mu_map().get(&(v, perm[p], perm[q], perm[s])) == Some(&x));
    let sizes = lhs.c_map().len() == rhs.c_map().len()
        && lhs.u_map().len() == rhs.u_map().len()
        && lhs.mu_map().len() == rhs.mu_map().len();
    Ok(same_support && c && u && lc && mu && sizes)
}

/// Duality identities on data, bit for bit, and `hol(G*) = conj hol(G)`.
pub fn duality(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let surfaces = closed_oriented_surfaces();
    let mut r = Report::new();
    for case in 0..cases {
        let (base, n) = pick(case, rng, &surfaces);
        let c = chain(&base, 3, n, rng);
        let (g, h) = (&c.g[0].gerbe, &c.g[1].gerbe);
        r.require("G** = G", g.dual().dual() == **g, || format!("case {case}"));
        attempt(&mut r, "(G⊗H)* = H*⊗G*", case, || Ok(exact(dual_of_tensor_matches(g, h)?)));
        let (Ok(a1), Ok(a2)) = (c.morphism(0, rng.random_range(1..=2), rng), c.morphism(1, rng.random_range(1..=2), rng)) else {
            r.record("construction", f64::INFINITY, 0.0, || format!("case {case}"));
            continue;
        };
        r.require("A** = A", identical(&dual_1(&dual_1(&a1)), &a1), || format!("case {case}"));
        attempt(&mut r, "(A'∘A)* = A*∘A'*", case, || {
            Ok(exact(identical(&dual_1(&compose_1(&a2, &a1)?), &compose_1(&dual_1(&a1), &dual_1(&a2))?)))
        });
        let (_, b1) = random_gauge_2(&a1, rng);
        let (_, b2) = random_gauge_2(&a2, rng);
        attempt(&mut r, "(β₂∘β₁)* = β₁*∘β₂*", case, || {
            let lhs = dual_2(&horizontal(&b2, &b1)?);
            let rhs = horizontal(&dual_2(&b1), &dual_2(&b2))?;
            Ok(exact(lhs.exactly_eq(&rhs)))
        });
        r.require("β** = β", dual_2(&dual_2(&b1)).exactly_eq(&b1), || format!("case {case}"));
        attempt(&mut r, "hol(G*) = conj hol(G)", case, || {
            let hg = holonomy_closed_seeded(g, 0)?;
            let hd = holonomy_closed_seeded(&Arc::new(g.dual()), 0)?;
            Ok((hd - hg.conj()).norm())
        });
    }
    r
}

/// Transport of Jandl structures: validity, the identity law (b), the
/// composition law (c) and 2-isomorphisms to morphisms (a).
pub fn jandl_transport_laws(cases: usize, rng: &mut ChaCha8Rng) -> Report {
    let mut r = Report::new();
    for case in 0..cases {
        let base = match case % 3 {
            0 => klein_bottle(3, 3).unwrap(),
            1 => rp2(),
            _ => klein_bottle(3, 4).unwrap(),
        };
        let eps = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let s = match jandl_setup(base, 1, eps, false, rng) {
            Ok(s) => s,
            Err(e) => {
                r.record("construction", f64::INFINITY, 0.0, || format!("case {case}: {e}"));
                continue;
            }
        };
        let rho = s.trivial.trivial_rho().unwrap();
        let cov = s.oc.cover.clone();
        let n1 = rng.random_range(1..=3);
        let n2 = rng.random_range(1..=3);
        let g1 = random_trivialized(cov.clone(), n1, &rho, rng);
        let g2 = random_trivialized(cov, n2, &rho, rng);
        let b1 = g1.iso.clone();
        attempt(&mut r, "transported structure valid", case, || {
            let j1 = jandl_transport(&b1, &s.j)?;
            Ok(exact(jandl_validate(&g1.gerbe, &j1).is_ok()))
        });
        attempt(&mut r, "(c) J_{B1∘B2} = J_{B2} J_{B1}", case, || {
            let b2 = Arc::new(compose_1(&inverse_1(&g1.iso)?, &g2.iso)?);
            let j1 = jandl_transport(&b1, &s.j)?;
            let left = jandl_transport(&Arc::new(compose_1(&b1, &b2)?), &s.j)?;
            let right = jandl_transport(&b2, &j1)?;
            if !identical(&left.a, &right.a) || !jandl_validate(&g2.gerbe, &left).is_ok() {
                return Ok(f64::INFINITY);
            }
            Ok(left.phi.max_deviation(&right.phi))
        });
        attempt(&mut r, "(b) J_id ≅ id", case, || {
            let j1 = jandl_transport(&b1, &s.j)?;
            let jid = jandl_transport(&Arc::new(identity_1(&g1.gerbe)), &j1)?;
            Ok(match jandl_equivalent(&jid, &j1) {
                Some(beta) => exact(jandl_morphism(&jid, &j1, &beta).is_ok()),
                None => f64::INFINITY,
            })
        });
        attempt(&mut r, "(a) 2-isomorphisms give morphisms", case, || {
            let j1 = jandl_transport(&b1, &s.j)?;
            let (b1p, beta) = random_gauge_2(&b1, rng);
            let j1p = jandl_transport(&b1p, &s.j)?;
            let bj = jandl_transport_2iso(&beta, &s.j)?;
            Ok(exact(jandl_morphism(&j1, &j1p, &bj).is_ok()))
        });
    }
    r
}

/// All suites, each law prefixed by its suite.
pub fn run_axioms(cases: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = Report::new();
    r.merge(two_category(cases, &mut rng).prefixed("2-category: "));
    r.merge(lemmas(cases, &mut rng).prefixed("lemmas: "));
    r.merge(invertibility(cases, &mut rng).prefixed("invertibility: "));
    r.merge(descent(cases, &mut rng).prefixed("descent: "));
    r.merge(bun_functor(cases, &mut rng).prefixed("bun: "));
    r.merge(duality(cases, &mut rng).prefixed("duality: "));
    r.merge(jandl_transport_laws(cases, &mut rng).prefixed("jandl: "));
    r
}
