//! Descent normalization: every 1-morphism is 2-isomorphic to one in
//! fibre-product form (its refinement is the pair cover `Y₁ ×_M Y₂` itself),
//! obtained by gluing `(A, d_A)`. On morphisms between trivial gerbes this
//! yields the functor `Bun` to ordinary bundles.

use crate::bundle::{BundleMorphism, DiscreteBundle};
use crate::error::{GerbeError, Result};
use crate::gerbe::BundleGerbe;
use crate::linalg::{max_dev, scalar, tolerance, CMat, C64};
use crate::report::Report;
use crate::site::{fiber_product, glue_with, Cover, Simplex};
use crate::twocat::{
    compose_1, identity_2, inverse_1, inverse_2, product_keys, vertical, Atomic, Canon, OneMorphism, TwoMorphism,
    TwoMorphismRep,
};
use crate::HashMap;
use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

/// The pair cover `P = Y₁ ×_M Y₂` with its legs and the index of each pair.
pub struct PairCover {
    pub cover: Arc<Cover>,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub index: HashMap<(usize, usize), usize>,
}

pub fn pair_cover(g1: &BundleGerbe, g2: &BundleGerbe) -> Result<PairCover> {
    let (c, legs) = fiber_product(&[g1.cover(), g2.cover()])?;
    let index = legs[0].iter().zip(&legs[1]).enumerate().map(|(p, (&i, &j))| ((i, j), p)).collect();
    Ok(PairCover { cover: Arc::new(c), s: legs[0].clone(), t: legs[1].clone(), index })
}

/// Whether `a` is atomic with refinement equal to the pair cover.
pub fn is_fp(a: &OneMorphism, p: &PairCover) -> bool {
    a.is_atomic() && **a.cover() == *p.cover && a.s() == p.s.as_slice() && a.t() == p.t.as_slice()
}

/// `S_A` in fibre-product form and the 2-isomorphism `S_A ⇒ A`.
#[derive(Debug, Clone)]
pub struct Normalized {
    pub fp: Arc<OneMorphism>,
    pub iso: TwoMorphism,
}

pub fn normalize_1(a: &Arc<OneMorphism>) -> Result<Normalized> {
    let p = pair_cover(a.source(), a.target())?;
    if is_fp(a, &p) {
        return Ok(Normalized { fp: a.clone(), iso: identity_2(a) });
    }
    let zeta: Vec<usize> = (0..a.cover().len()).map(|k| p.index[&(a.s()[k], a.t()[k])]).collect();
    let glued = glue_with(&p.cover, &zeta, a.bundle(), |v, x, y| a.d(v, x, y));
    let base = p.cover.base().clone();
    let sec = |q: usize, v: usize| glued.vertex_section[&(q, v)];
    let mut alpha = HashMap::default();
    for v in 0..base.n_vertices() {
        for &q in p.cover.at_vertex(v) {
            for &qp in p.cover.at_vertex(v) {
                alpha.insert((v, q, qp), a.alpha(v, sec(q, v), sec(qp, v)));
            }
        }
    }
    let s = Atomic {
        source: a.source().clone(),
        target: a.target().clone(),
        z: p.cover.clone(),
        s: p.s.clone(),
        t: p.t.clone(),
        bundle: glued.bundle,
        alpha,
    };
    let fp = Arc::new(OneMorphism::atomic(s.with_forced_curvature()));
    let canon: Canon =
        product_keys(&fp, a).into_iter().map(|(v, q, k)| ((v, q, k), glued.beta[&(v, k)].clone())).collect();
    let iso = TwoMorphism::from_canonical(fp.clone(), a.clone(), canon);
    Ok(Normalized { fp, iso })
}

/// A 2-morphism moved between the fibre-product forms of its ends, with
/// the check that pulling it back to the given representative recovers it.
#[derive(Debug, Clone)]
pub struct NormalizedTwo {
    pub source: Normalized,
    pub target: Normalized,
    /// `β_P: S_{A₁} ⇒ S_{A₂}`.
    pub beta: TwoMorphism,
    pub report: Report,
}

impl NormalizedTwo {
    /// `β_P(v, p)` on the pair cover.
    pub fn at(&self, v: usize, p: usize) -> &CMat {
        self.beta.get(v, p, p)
    }
}

pub fn normalize_2(rep: &TwoMorphismRep) -> Result<NormalizedTwo> {
    let b = TwoMorphism::from_rep(rep.clone())?;
    let n1 = normalize_1(&rep.source)?;
    let n2 = normalize_1(&rep.target)?;
    let beta = vertical(&inverse_2(&n2.iso)?, &vertical(&b, &n1.iso)?)?;
    let eps = tolerance();
    let mut report = Report::new();
    let a1 = &rep.source;
    let p = pair_cover(a1.source(), a1.target())?;
    let inv1 = inverse_2(&n1.iso)?;
    for (&(v, w), m) in &rep.beta {
        let (z1, z2) = (rep.legs[0][w], rep.legs[1][w]);
        let q = p.index[&(a1.s()[z1], a1.t()[z1])];
        let pulled = n2.iso.get(v, q, z2) * beta.get(v, q, q) * inv1.get(v, z1, q);
        report.record("descended value", max_dev(&pulled, m), eps, || format!("vertex {v} index {w}"));
    }
    Ok(NormalizedTwo { source: n1, target: n2, beta, report })
}

/// `Bun(A)` for `A: I_ρ₁ → I_ρ₂`, with the normalization kept for the
/// identifications used by the functor laws.
#[derive(Debug, Clone)]
pub struct Bun {
    pub bundle: DiscreteBundle,
    pub normalized: Normalized,
}

fn require_trivial_ends(a: &OneMorphism) -> Result<()> {
    a.source().require_trivial()?;
    a.target().require_trivial()?;
    Ok(())
}

pub fn bun(a: &Arc<OneMorphism>) -> Result<Bun> {
    require_trivial_ends(a)?;
    let normalized = normalize_1(a)?;
    Ok(Bun { bundle: normalized.fp.bundle().clone(), normalized })
}

/// `Bun(β): Bun(A) → Bun(A')`.
pub fn bun_2(b: &TwoMorphism) -> Result<BundleMorphism> {
    require_trivial_ends(b.source())?;
    let n1 = normalize_1(b.source())?;
    let n2 = normalize_1(b.target())?;
    let beta = vertical(&inverse_2(&n2.iso)?, &vertical(b, &n1.iso)?)?;
    let nv = b.source().cover().base().n_vertices();
    let matrices = vec![(0..nv).map(|v| Some(beta.get(v, 0, 0).clone())).collect()];
    Ok(BundleMorphism { matrices })
}

/// A 2-isomorphism `a1 ⇒ a2` between rank-1 morphisms, found by propagating
/// a unit value along (2M) and the edge transports; `None` if none exists.
pub fn solve_2iso(a1: &Arc<OneMorphism>, a2: &Arc<OneMorphism>) -> Option<TwoMorphism> {
    if a1.rank() != 1 || a2.rank() != 1 {
        return None;
    }
    let keys = product_keys(a1, a2);
    let base = a1.cover().base().clone();
    let mut by_vertex: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for &(v, z1, z2) in &keys {
        by_vertex.entry(v).or_default().push((z1, z2));
    }
    let mut val: BTreeMap<(usize, usize, usize), C64> = BTreeMap::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    for &(v0, z1, z2) in &keys {
        if val.contains_key(&(v0, z1, z2)) {
            continue;
        }
        val.insert((v0, z1, z2), C64::new(1.0, 0.0));
        queue.push_back(v0);
        while let Some(v) = queue.pop_front() {
            // fill the vertex from any known entry via (2M)
            let known = by_vertex[&v].iter().find(|&&(x, y)| val.contains_key(&(v, x, y))).copied().unwrap();
            let b0 = val[&(v, known.0, known.1)];
            for &(y1, y2) in &by_vertex[&v] {
                let x = a2.alpha(v, known.1, y2)[(0, 0)].conj() * b0 * a1.alpha(v, known.0, y1)[(0, 0)];
                val.entry((v, y1, y2)).or_insert(x);
            }
            for e in base.vertex_edges(v) {
                let [e0, e1] = base.edge(e);
                let w = if e0 == v { e1 } else { e0 };
                if by_vertex.get(&w).is_none_or(|ks| ks.iter().any(|&(x, y)| val.contains_key(&(w, x, y)))) {
                    continue;
                }
                let pair = a1.cover().at_edge(e).iter().find_map(|&z1| {
                    a2.cover().at_edge(e).iter().find(|&&z2| a1.s()[z1] == a2.s()[z2] && a1.t()[z1] == a2.t()[z2]).map(|&z2| (z1, z2))
                });
                let Some((z1, z2)) = pair else { continue };
                let (u1, u2) = (a1.bundle().transport(z1, e)[(0, 0)], a2.bundle().transport(z2, e)[(0, 0)]);
                let bv = val[&(v, z1, z2)];
                let x = if e0 == v { u2 * bv * u1.conj() } else { u2.conj() * bv * u1 };
                val.insert((w, z1, z2), x);
                queue.push_back(w);
            }
        }
    }
    let canon: Canon = val.into_iter().map(|(k, x)| (k, scalar(x))).collect();
    let b = TwoMorphism::from_canonical(a1.clone(), a2.clone(), canon);
    b.validate().is_ok().then_some(b)
}

/// `A ⊗ N` for a flat line `N` on the one-index cover of the base: the
/// transports of `A` are multiplied by those of `N`.
pub fn twist_by_flat_line(a: &OneMorphism, line: &DiscreteBundle) -> Result<OneMorphism> {
    if line.rank() != 1 || line.cover().len() != 1 {
        return Err(GerbeError::Scenario("twisting line must be a line on the one-index cover".into()));
    }
    let mut at = a.atomize();
    let base = at.z.base().clone();
    let transport = (0..at.z.len())
        .map(|k| {
            (0..base.n_edges())
                .map(|e| at.z.valid(k, Simplex::E(e)).then(|| at.bundle.transport(k, e) * line.transport(0, e)[(0, 0)]))
                .collect()
        })
        .collect();
    at.bundle = DiscreteBundle::from_parts(at.z.clone(), at.bundle.rank(), transport, at.bundle.trace_curvatures().to_vec());
    let m = OneMorphism::atomic(at);
    m.check()?;
    Ok(m)
}

/// A rank-1 fibre-product 1-isomorphism `G₁ → G₂` when one exists, built
/// from trivializations `T₂⁻¹ ∘ E ∘ T₁` with `E` a line of curvature `ρ₂ − ρ₁`.
pub fn stably_isomorphic(g1: &Arc<BundleGerbe>, g2: &Arc<BundleGerbe>) -> Result<Option<Arc<OneMorphism>>> {
    if *g1.base() != *g2.base() {
        return Err(GerbeError::BaseMismatch);
    }
    let t1 = crate::holonomy::trivialize(g1, 0)?;
    let t2 = crate::holonomy::trivialize(g2, 0)?;
    let theta: Vec<f64> = t2.rho.iter().zip(&t1.rho).map(|(a, b)| a - b).collect();
    let Some(line) = DiscreteBundle::line_with_curvature(t1.trivial.cover().clone(), &theta) else {
        return Ok(None);
    };
    let base = g1.base().clone();
    let alpha = (0..base.n_vertices()).map(|v| ((v, 0, 0), scalar(C64::new(1.0, 0.0)))).collect();
    let e = Atomic {
        source: t1.trivial.clone(),
        target: t2.trivial.clone(),
        z: t1.trivial.cover().clone(),
        s: vec![0],
        t: vec![0],
        bundle: line,
        alpha,
    };
    let e = OneMorphism::atomic(e.with_forced_curvature());
    let chain = compose_1(&inverse_1(&t2.iso)?, &compose_1(&e, &t1.iso)?)?;
    Ok(Some(normalize_1(&Arc::new(chain))?.fp))
}

#[cfg(test)]
mod tests;
