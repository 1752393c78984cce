//! Seeded generators of covers, gerbes and morphisms for tests, examples and
//! the randomized axiom suites.

use crate::bundle::DiscreteBundle;
use crate::error::Result;
use crate::gerbe::BundleGerbe;
use crate::linalg::{random_phase, random_special_unitary, random_unitary, scalar, CMat, C64};
use crate::site::{Cover, Simplex, Support};
use crate::surface::SimplicialSurface;
use crate::twocat::{compose_1, inverse_1, Atomic, Canon, OneMorphism, TwoMorphism, TwoMorphismRep};
use crate::HashMap;
use rand::Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// A random 2-form: one real per triangle in `(-1, 1)`.
pub fn random_rho<R: Rng>(base: &SimplicialSurface, rng: &mut R) -> Vec<f64> {
    (0..base.n_triangles()).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// A cover with `n` indices whose supports are closures of random sets of
/// top-dimensional simplices, each simplex covered at least once.
pub fn random_cover<R: Rng>(base: Arc<SimplicialSurface>, n: usize, rng: &mut R) -> Cover {
    assert!(n >= 1);
    let tops: Vec<Simplex> = if base.n_triangles() > 0 {
        (0..base.n_triangles()).map(Simplex::T).collect()
    } else {
        (0..base.n_edges()).map(Simplex::E).collect()
    };
    let mut sets: Vec<Vec<Simplex>> = vec![Vec::new(); n];
    for &x in &tops {
        let mut any = false;
        for set in sets.iter_mut() {
            if rng.random_bool(0.55) {
                set.push(x);
                any = true;
            }
        }
        if !any {
            sets[rng.random_range(0..n)].push(x);
        }
    }
    for i in 0..n {
        if sets[i].is_empty() {
            sets[i].push(tops[rng.random_range(0..tops.len())]);
        }
    }
    let supports = sets.iter().map(|s| crate::site::Support::closure(&base, s)).collect();
    let labels = (0..n).map(|i| vec![format!("U{i}")]).collect();
    Cover::new(base, labels, supports).expect("random cover is valid")
}

/// The gauge data from which a random gerbe was built: per index a line
/// `λ_i` (transports and curvature) and per vertex and pair a phase `g_ij`.
#[derive(Debug, Clone)]
pub struct GerbeGauge {
    pub rho: Vec<f64>,
    /// Transport of `λ_i` along edge `e`, keyed `(i, e)`.
    pub line: BTreeMap<(usize, usize), C64>,
    /// Curvature of `λ_i` on `t`, keyed `(i, t)`.
    pub line_curv: BTreeMap<(usize, usize), f64>,
    /// `g_ij(v)`, keyed `(v, i, j)`.
    pub g: BTreeMap<(usize, usize, usize), C64>,
}

/// A random gerbe in the gauge orbit of `I_ρ`:
/// `L_ij = λ_i* ⊗ λ_j` twisted by `δg`, `μ = δg`, `C_i = ρ + curv(λ_i)`.
pub fn random_gerbe<R: Rng>(
    base: Arc<SimplicialSurface>,
    n: usize,
    rho: &[f64],
    rng: &mut R,
) -> (BundleGerbe, GerbeGauge) {
    let cover = Arc::new(random_cover(base.clone(), n, rng));
    gauge_gerbe(cover, rho, rng)
}

/// A random gauge of `I_ρ` on a given cover.
pub fn gauge_gerbe<R: Rng>(cover: Arc<Cover>, rho: &[f64], rng: &mut R) -> (BundleGerbe, GerbeGauge) {
    let base = cover.base().clone();
    let mut line = BTreeMap::new();
    let mut line_curv = BTreeMap::new();
    let mut g = BTreeMap::new();
    for i in 0..cover.len() {
        for e in 0..base.n_edges() {
            if cover.valid(i, Simplex::E(e)) {
                line.insert((i, e), random_phase(rng));
            }
        }
        for t in 0..base.n_triangles() {
            if cover.valid(i, Simplex::T(t)) {
                let mut h = C64::new(1.0, 0.0);
                for (e, s) in base.triangle_edges(t) {
                    h *= if s > 0 { line[&(i, e)] } else { line[&(i, e)].conj() };
                }
                let m = rng.random_range(-1i32..=1) as f64;
                line_curv.insert((i, t), h.arg() + 2.0 * PI * m);
            }
        }
    }
    for v in 0..base.n_vertices() {
        for &i in cover.at_vertex(v) {
            for &j in cover.at_vertex(v) {
                g.insert((v, i, j), random_phase(rng));
            }
        }
    }
    let mut c = BTreeMap::new();
    let mut u = BTreeMap::new();
    let mut mu = BTreeMap::new();
    for t in 0..base.n_triangles() {
        for &i in cover.at_triangle(t) {
            c.insert((i, t), rho[t] + line_curv[&(i, t)]);
        }
    }
    for e in 0..base.n_edges() {
        let [v0, v1] = base.edge(e);
        for &i in cover.at_edge(e) {
            for &j in cover.at_edge(e) {
                let x = line[&(i, e)].conj() * line[&(j, e)] * g[&(v0, i, j)] * g[&(v1, i, j)].conj();
                u.insert((i, j, e), x);
            }
        }
    }
    for v in 0..base.n_vertices() {
        let ks = cover.at_vertex(v);
        for &i in ks {
            for &j in ks {
                for &k in ks {
                    mu.insert((v, i, j, k), g[&(v, i, j)] * g[&(v, j, k)] * g[&(v, i, k)].conj());
                }
            }
        }
    }
    let gerbe = BundleGerbe::from_parts(cover, c, u, mu);
    (gerbe, GerbeGauge { rho: rho.to_vec(), line, line_curv, g })
}

/// A gerbe together with its known trivialization `B: G → I_ρ`.
#[derive(Debug, Clone)]
pub struct TrivializedGerbe {
    pub gerbe: Arc<BundleGerbe>,
    pub trivial: Arc<BundleGerbe>,
    pub iso: Arc<OneMorphism>,
    pub gauge: GerbeGauge,
}

/// `B: G → I_ρ` for a gauge gerbe: `B_i = λ_i*`, `α_B(v, i, i') = g_{ii'}(v)`.
pub fn gauge_iso(g: &Arc<BundleGerbe>, gauge: &GerbeGauge, trivial: &Arc<BundleGerbe>) -> OneMorphism {
    let z = g.cover().clone();
    let base = z.base().clone();
    let transport = (0..z.len())
        .map(|i| {
            (0..base.n_edges())
                .map(|e| z.valid(i, Simplex::E(e)).then(|| scalar(gauge.line[&(i, e)].conj())))
                .collect()
        })
        .collect();
    let tc = vec![vec![None; base.n_triangles()]; z.len()];
    let bundle = DiscreteBundle::from_parts(z.clone(), 1, transport, tc);
    let mut alpha = HashMap::default();
    for v in 0..base.n_vertices() {
        for &i in z.at_vertex(v) {
            for &j in z.at_vertex(v) {
                alpha.insert((v, i, j), scalar(gauge.g[&(v, i, j)]));
            }
        }
    }
    let a = Atomic {
        source: g.clone(),
        target: trivial.clone(),
        z: z.clone(),
        s: (0..z.len()).collect(),
        t: vec![0; z.len()],
        bundle,
        alpha,
    };
    OneMorphism::atomic(a.with_forced_curvature())
}

/// A random gauge gerbe on `n` cover indices with its trivialization.
pub fn random_trivialized<R: Rng>(base: Arc<SimplicialSurface>, n: usize, rho: &[f64], rng: &mut R) -> TrivializedGerbe {
    let (g, gauge) = random_gerbe(base.clone(), n, rho, rng);
    let gerbe = Arc::new(g);
    let trivial = Arc::new(BundleGerbe::trivial(base, rho));
    let iso = Arc::new(gauge_iso(&gerbe, &gauge, &trivial));
    TrivializedGerbe { gerbe, trivial, iso, gauge }
}

/// A random line on the base: edge phases and a curvature lift per triangle.
#[derive(Debug, Clone)]
pub struct Twist {
    pub phase: Vec<C64>,
    pub theta: Vec<f64>,
}

pub fn random_twist<R: Rng>(base: &SimplicialSurface, rng: &mut R) -> Twist {
    let phase: Vec<C64> = (0..base.n_edges()).map(|_| random_phase(rng)).collect();
    let theta = (0..base.n_triangles())
        .map(|t| {
            let mut h = C64::new(1.0, 0.0);
            for (e, s) in base.triangle_edges(t) {
                h *= if s > 0 { phase[e] } else { phase[e].conj() };
            }
            h.arg() + 2.0 * PI * rng.random_range(-1i32..=1) as f64
        })
        .collect();
    Twist { phase, theta }
}

/// `ρ + θ`, the 2-form of the target of a twisted morphism.
pub fn twisted_rho(rho: &[f64], twist: &Twist) -> Vec<f64> {
    rho.iter().zip(&twist.theta).map(|(a, b)| a + b).collect()
}

/// `E = SU(n) ⊗ N: I_ρ₁ → I_ρ₂` on the trivial covers.
pub fn twist_morphism<R: Rng>(
    i1: &Arc<BundleGerbe>,
    i2: &Arc<BundleGerbe>,
    twist: &Twist,
    rank: usize,
    rng: &mut R,
) -> OneMorphism {
    let z = i1.cover().clone();
    let base = z.base().clone();
    let transport = vec![(0..base.n_edges()).map(|e| Some(random_special_unitary(rng, rank) * twist.phase[e])).collect()];
    let tc = vec![vec![None; base.n_triangles()]];
    let bundle = DiscreteBundle::from_parts(z.clone(), rank, transport, tc);
    let alpha = (0..base.n_vertices()).map(|v| ((v, 0, 0), crate::linalg::identity(rank))).collect();
    let a = Atomic { source: i1.clone(), target: i2.clone(), z, s: vec![0], t: vec![0], bundle, alpha };
    OneMorphism::atomic(a.with_forced_curvature())
}

/// A random refinement: every index is split into one to three pieces whose
/// supports cover the original one. Returns the new cover and the map to the old.
pub fn random_refinement<R: Rng>(cover: &Cover, rng: &mut R) -> (Cover, Vec<usize>) {
    split_refinement(cover, 3, rng)
}

/// A random refinement splitting every index into one to `max` pieces.
pub fn split_refinement<R: Rng>(cover: &Cover, max: usize, rng: &mut R) -> (Cover, Vec<usize>) {
    let base = cover.base().clone();
    let mut labels = Vec::new();
    let mut supports = Vec::new();
    let mut map = Vec::new();
    for k in 0..cover.len() {
        let maximal = cover.support(k).maximal(&base);
        let m = rng.random_range(1..=max.max(1)).min(maximal.len().max(1));
        let mut sets: Vec<Vec<Simplex>> = vec![Vec::new(); m];
        for &x in &maximal {
            let mut any = false;
            for set in sets.iter_mut() {
                if rng.random_bool(0.6) {
                    set.push(x);
                    any = true;
                }
            }
            if !any {
                sets[rng.random_range(0..m)].push(x);
            }
        }
        for (p, set) in sets.into_iter().enumerate() {
            if set.is_empty() {
                continue;
            }
            let mut l = cover.label(k).clone();
            l.push(format!("r{p}"));
            labels.push(l);
            supports.push(Support::closure(&base, &set));
            map.push(k);
        }
    }
    (Cover::unchecked(base, labels, supports), map)
}

/// A random refinement of `A` twisted by a random unitary gauge per vertex
/// and index; the result is 2-isomorphic to `A`.
pub fn refine_and_gauge<R: Rng>(a: &OneMorphism, rng: &mut R) -> OneMorphism {
    let (cover, map) = random_refinement(a.cover(), rng);
    gauge_along(a, cover, map, rng)
}

/// Like [`refine_and_gauge`] with every index split into at most two pieces.
pub fn split_and_gauge<R: Rng>(a: &OneMorphism, rng: &mut R) -> OneMorphism {
    let (cover, map) = split_refinement(a.cover(), 2, rng);
    gauge_along(a, cover, map, rng)
}

fn gauge_along<R: Rng>(a: &OneMorphism, cover: Cover, map: Vec<usize>, rng: &mut R) -> OneMorphism {
    let z = Arc::new(cover);
    let base = z.base().clone();
    let n = a.rank();
    let mut g: HashMap<(usize, usize), CMat> = HashMap::default();
    for v in 0..base.n_vertices() {
        for &k in z.at_vertex(v) {
            g.insert((v, k), random_unitary(rng, n));
        }
    }
    let transport = (0..z.len())
        .map(|k| {
            (0..base.n_edges())
                .map(|e| {
                    z.valid(k, Simplex::E(e)).then(|| {
                        let [v0, v1] = base.edge(e);
                        &g[&(v1, k)] * a.bundle().transport(map[k], e) * g[&(v0, k)].adjoint()
                    })
                })
                .collect()
        })
        .collect();
    let bundle = DiscreteBundle::from_parts(z.clone(), n, transport, vec![vec![None; base.n_triangles()]; z.len()]);
    let mut alpha = HashMap::default();
    for v in 0..base.n_vertices() {
        for &k in z.at_vertex(v) {
            for &kp in z.at_vertex(v) {
                alpha.insert((v, k, kp), &g[&(v, k)] * a.alpha(v, map[k], map[kp]) * g[&(v, kp)].adjoint());
            }
        }
    }
    let at = Atomic {
        source: a.source().clone(),
        target: a.target().clone(),
        z,
        s: map.iter().map(|&k| a.s()[k]).collect(),
        t: map.iter().map(|&k| a.t()[k]).collect(),
        bundle,
        alpha,
    };
    OneMorphism::atomic(at.with_forced_curvature())
}

/// A random rank-`n` morphism `G₁ → G₂`, built as `B₂⁻¹ ∘ E ∘ B₁` and then
/// refined and gauged. Requires `ρ₂ = ρ₁ + θ` for the given twist.
pub fn random_morphism<R: Rng>(
    g1: &TrivializedGerbe,
    g2: &TrivializedGerbe,
    twist: &Twist,
    rank: usize,
    rng: &mut R,
) -> Result<OneMorphism> {
    let e = twist_morphism(&g1.trivial, &g2.trivial, twist, rank, rng);
    let b2_inv = inverse_1(&g2.iso)?;
    let chain = compose_1(&b2_inv, &compose_1(&e, &g1.iso)?)?;
    let atomic = OneMorphism::atomic(chain.atomize().with_forced_curvature());
    Ok(split_and_gauge(&atomic, rng))
}

/// A gauge transform `A'` of an atomic-on-the-same-refinement copy of `A`
/// together with the 2-isomorphism `β = g · d_A: A ⇒ A'`.
pub fn random_gauge_2<R: Rng>(a: &Arc<OneMorphism>, rng: &mut R) -> (Arc<OneMorphism>, TwoMorphism) {
    let z = a.cover().clone();
    let base = z.base().clone();
    let n = a.rank();
    let mut g: HashMap<(usize, usize), CMat> = HashMap::default();
    for v in 0..base.n_vertices() {
        for &k in z.at_vertex(v) {
            g.insert((v, k), random_unitary(rng, n));
        }
    }
    let transport = (0..z.len())
        .map(|k| {
            (0..base.n_edges())
                .map(|e| {
                    z.valid(k, Simplex::E(e)).then(|| {
                        let [v0, v1] = base.edge(e);
                        &g[&(v1, k)] * a.bundle().transport(k, e) * g[&(v0, k)].adjoint()
                    })
                })
                .collect()
        })
        .collect();
    let bundle = DiscreteBundle::from_parts(z.clone(), n, transport, vec![vec![None; base.n_triangles()]; z.len()]);
    let mut alpha = HashMap::default();
    for v in 0..base.n_vertices() {
        for &k in z.at_vertex(v) {
            for &kp in z.at_vertex(v) {
                alpha.insert((v, k, kp), &g[&(v, k)] * a.alpha(v, k, kp) * g[&(v, kp)].adjoint());
            }
        }
    }
    let at = Atomic {
        source: a.source().clone(),
        target: a.target().clone(),
        z,
        s: a.s().to_vec(),
        t: a.t().to_vec(),
        bundle,
        alpha,
    };
    let ap = Arc::new(OneMorphism::atomic(at.with_forced_curvature()));
    let canon: Canon = crate::twocat::product_keys(a, &ap)
        .into_iter()
        .map(|(v, z1, z2)| ((v, z1, z2), &g[&(v, z2)] * a.d(v, z1, z2)))
        .collect();
    (ap.clone(), TwoMorphism::from_canonical(a.clone(), ap, canon))
}

/// The same 2-morphism on a random refinement of its representative's cover.
pub fn refine_rep<R: Rng>(rep: &TwoMorphismRep, rng: &mut R) -> TwoMorphismRep {
    let (w2, map) = random_refinement(&rep.w, rng);
    let mut beta = BTreeMap::new();
    for v in 0..w2.base().n_vertices() {
        for &i in w2.at_vertex(v) {
            beta.insert((v, i), rep.beta[&(v, map[i])].clone());
        }
    }
    TwoMorphismRep {
        source: rep.source.clone(),
        target: rep.target.clone(),
        legs: [0, 1].map(|s| map.iter().map(|&i| rep.legs[s][i]).collect()),
        beta,
        w: Arc::new(w2),
    }
}
