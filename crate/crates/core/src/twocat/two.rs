//! 2-morphisms. Every 2-morphism is stored in a canonical form: its value at
//! each vertex `v` on every pair `(z₁, z₂)` of indices of the two
//! refinements valid at `v` and lying over the same pair of gerbe indices.
//! Any representative on a finer refinement descends to this form.

use super::one::{compose_1, identity_1, inverse_1, pullback_1, same_gerbe, tensor_1_pairs, OneMorphism};
use crate::error::{GerbeError, Result};
use crate::linalg::{kron, max_dev, reverse_factors, scalar, tolerance, unitarity_defect, CMat};
use crate::report::Report;
use crate::site::{Cover, Simplex};
use crate::surface::SimplicialMap;
use crate::HashMap;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Canonical values keyed `(v, z₁, z₂)`, each a map `A_{z₁} → A'_{z₂}`.
pub type Canon = BTreeMap<(usize, usize, usize), CMat>;

/// A 2-morphism given on an arbitrary common refinement `ω: W → Z ×_P Z'`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoMorphismRep {
    pub source: Arc<OneMorphism>,
    pub target: Arc<OneMorphism>,
    pub w: Arc<Cover>,
    /// Leg maps `W → Z` and `W → Z'`.
    pub legs: [Vec<usize>; 2],
    /// `β(v, w)`, keyed `(v, w)`.
    pub beta: BTreeMap<(usize, usize), CMat>,
}

#[derive(Debug, Clone)]
pub struct TwoMorphism {
    source: Arc<OneMorphism>,
    target: Arc<OneMorphism>,
    canon: Canon,
    rep: Option<Arc<TwoMorphismRep>>,
}

/// All canonical keys for 2-morphisms `a1 ⇒ a2`.
pub fn product_keys(a1: &OneMorphism, a2: &OneMorphism) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for v in 0..a1.cover().base().n_vertices() {
        for &z1 in a1.cover().at_vertex(v) {
            for &z2 in a2.fiber(v, a1.s()[z1], a1.t()[z1]) {
                out.push((v, z1, z2));
            }
        }
    }
    out
}

fn parallel(a1: &OneMorphism, a2: &OneMorphism) -> Result<()> {
    if !same_gerbe(a1.source(), a2.source()) || !same_gerbe(a1.target(), a2.target()) {
        return Err(GerbeError::MorphismMismatch("2-morphism between non-parallel 1-morphisms".into()));
    }
    Ok(())
}

fn same_one(a: &Arc<OneMorphism>, b: &Arc<OneMorphism>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl TwoMorphism {
    /// Wraps canonical values without validation.
    pub fn from_canonical(source: Arc<OneMorphism>, target: Arc<OneMorphism>, canon: Canon) -> Self {
        TwoMorphism { source, target, canon, rep: None }
    }

    /// Wraps canonical values and checks the 2-morphism axioms.
    pub fn new(source: Arc<OneMorphism>, target: Arc<OneMorphism>, canon: Canon) -> Result<Self> {
        parallel(&source, &target)?;
        let b = Self::from_canonical(source, target, canon);
        b.check()?;
        Ok(b)
    }

    /// Descends a representative to canonical form. Values over the same
    /// canonical key must agree within tolerance.
    pub fn from_rep(rep: TwoMorphismRep) -> Result<Self> {
        let (a1, a2) = (&rep.source, &rep.target);
        parallel(a1, a2)?;
        let w = &rep.w;
        if *w.base() != *a1.cover().base() || rep.legs[0].len() != w.len() || rep.legs[1].len() != w.len() {
            return Err(GerbeError::BaseMismatch);
        }
        for k in 0..w.len() {
            let (z1, z2) = (rep.legs[0][k], rep.legs[1][k]);
            if z1 >= a1.cover().len() || z2 >= a2.cover().len() {
                return Err(GerbeError::InvalidDescent(format!("leg of index {k} out of range")));
            }
            let ok = w.support(k).is_subset(a1.cover().support(z1))
                && w.support(k).is_subset(a2.cover().support(z2))
                && a1.s()[z1] == a2.s()[z2]
                && a1.t()[z1] == a2.t()[z2];
            if !ok {
                return Err(GerbeError::InvalidDescent(format!("index {k} does not refine its legs")));
            }
        }
        let eps = tolerance();
        let mut over: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::default();
        for v in 0..w.base().n_vertices() {
            for &k in w.at_vertex(v) {
                over.entry((v, rep.legs[0][k], rep.legs[1][k])).or_default().push(k);
            }
        }
        let mut canon = Canon::new();
        for (v, z1, z2) in product_keys(a1, a2) {
            let mut chosen: Option<&CMat> = None;
            for &k in over.get(&(v, z1, z2)).map_or(&[][..], |x| x.as_slice()) {
                let m = rep.beta.get(&(v, k)).ok_or_else(|| GerbeError::InvalidDescent(format!("no value at vertex {v} index {k}")))?;
                match chosen {
                    None => chosen = Some(m),
                    Some(c) => {
                        if c.shape() != m.shape() || max_dev(c, m) > eps {
                            return Err(GerbeError::DescentObstruction(format!("vertex {v} pair ({z1},{z2})")));
                        }
                    }
                }
            }
            let m = chosen.ok_or_else(|| GerbeError::EmptyRefinement(format!("vertex {v} pair ({z1},{z2})")))?;
            canon.insert((v, z1, z2), m.clone());
        }
        let b = TwoMorphism { source: rep.source.clone(), target: rep.target.clone(), canon, rep: Some(Arc::new(rep)) };
        b.check()?;
        Ok(b)
    }

    pub fn source(&self) -> &Arc<OneMorphism> {
        &self.source
    }
    pub fn target(&self) -> &Arc<OneMorphism> {
        &self.target
    }
    pub fn canon(&self) -> &Canon {
        &self.canon
    }
    pub fn rep(&self) -> Option<&Arc<TwoMorphismRep>> {
        self.rep.as_ref()
    }
    pub fn get(&self, v: usize, z1: usize, z2: usize) -> &CMat {
        self.canon.get(&(v, z1, z2)).unwrap_or_else(|| panic!("2-morphism undefined at vertex {v} ({z1},{z2})"))
    }

    /// The canonical form as a representative on `Z ×_P Z'`.
    pub fn to_rep(&self) -> TwoMorphismRep {
        let (a1, a2) = (&self.source, &self.target);
        let (w, pairs) = crate::site::product_cover(a1.cover(), a2.cover(), |z1, z2| {
            a1.s()[z1] == a2.s()[z2] && a1.t()[z1] == a2.t()[z2]
        })
        .expect("same base");
        let mut beta = BTreeMap::new();
        for k in 0..w.len() {
            for v in 0..w.base().n_vertices() {
                if w.valid(k, Simplex::V(v)) {
                    beta.insert((v, k), self.get(v, pairs[k].0, pairs[k].1).clone());
                }
            }
        }
        TwoMorphismRep {
            source: a1.clone(),
            target: a2.clone(),
            w: Arc::new(w),
            legs: [pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()],
            beta,
        }
    }

    /// Coverage, shapes, (2M) and compatibility with the connections.
    pub fn validate(&self) -> Report {
        let eps = tolerance();
        let mut r = Report::new();
        let (a1, a2) = (&*self.source, &*self.target);
        let keys = product_keys(a1, a2);
        r.require("keys", keys.len() == self.canon.len(), || format!("{} keys, {} values", keys.len(), self.canon.len()));
        for k in &keys {
            match self.canon.get(k) {
                None => r.require("keys", false, || format!("missing {k:?}")),
                Some(m) => r.require("shape", m.shape() == (a2.rank(), a1.rank()), || format!("{k:?}")),
            }
        }
        if !r.is_ok() {
            return r;
        }
        let base = a1.cover().base();
        for v in 0..base.n_vertices() {
            let at: Vec<(usize, usize)> = keys.iter().filter(|k| k.0 == v).map(|k| (k.1, k.2)).collect();
            let pairs: Vec<((usize, usize), (usize, usize))> = if at.len() <= 40 {
                at.iter().flat_map(|&x| at.iter().map(move |&y| (x, y))).collect()
            } else {
                at.iter().flat_map(|&x| [(at[0], x), (x, at[0])]).collect()
            };
            for ((z1, z2), (y1, y2)) in pairs {
                let lhs = a2.alpha(v, z2, y2) * self.get(v, y1, y2);
                let rhs = self.get(v, z1, z2) * a1.alpha(v, z1, y1);
                r.record("2M", max_dev(&lhs, &rhs), eps, || format!("vertex {v} ({z1},{z2}) ({y1},{y2})"));
            }
        }
        for e in 0..base.n_edges() {
            let [v0, v1] = base.edge(e);
            for &z1 in a1.cover().at_edge(e) {
                for &z2 in a2.fiber(v0, a1.s()[z1], a1.t()[z1]) {
                    if !a2.cover().valid(z2, Simplex::E(e)) {
                        continue;
                    }
                    let lhs = self.get(v1, z1, z2) * a1.bundle().transport(z1, e);
                    let rhs = a2.bundle().transport(z2, e) * self.get(v0, z1, z2);
                    r.record("parallel", max_dev(&lhs, &rhs), eps, || format!("edge {e} ({z1},{z2})"));
                }
            }
        }
        r
    }

    pub fn check(&self) -> Result<()> {
        let r = self.validate();
        match r.failed_laws().first() {
            None => Ok(()),
            Some(l) => Err(GerbeError::MorphismMismatch(format!("{l}: {:?}", r.laws[*l].locations))),
        }
    }

    /// Largest entrywise deviation, infinite when not comparable.
    pub fn max_deviation(&self, other: &TwoMorphism) -> f64 {
        if !same_one(&self.source, &other.source) || !same_one(&self.target, &other.target) {
            return f64::INFINITY;
        }
        if self.canon.len() != other.canon.len() {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for (k, x) in &self.canon {
            match other.canon.get(k) {
                Some(y) if x.shape() == y.shape() => m = m.max(max_dev(x, y)),
                _ => return f64::INFINITY,
            }
        }
        m
    }

    pub fn approx_eq(&self, other: &TwoMorphism, eps: f64) -> bool {
        self.max_deviation(other) <= eps
    }

    /// Exact equality of source, target and canonical values.
    pub fn exactly_eq(&self, other: &TwoMorphism) -> bool {
        same_one(&self.source, &other.source) && same_one(&self.target, &other.target) && self.canon == other.canon
    }
}

/// Two representatives define the same 2-morphism.
pub fn equivalent_2(a: &TwoMorphismRep, b: &TwoMorphismRep) -> Result<bool> {
    let (x, y) = (TwoMorphism::from_rep(a.clone())?, TwoMorphism::from_rep(b.clone())?);
    Ok(x.approx_eq(&y, tolerance()))
}

/// `id_A`, given by `d_A` on the canonical pairs.
pub fn identity_2(a: &Arc<OneMorphism>) -> TwoMorphism {
    let canon = product_keys(a, a).into_iter().map(|(v, z1, z2)| ((v, z1, z2), a.d(v, z1, z2))).collect();
    TwoMorphism::from_canonical(a.clone(), a.clone(), canon)
}

/// `b2 • b1` for `b1: A1 ⇒ A2`, `b2: A2 ⇒ A3`: computed on every
/// intermediate index and descended.
pub fn vertical(b2: &TwoMorphism, b1: &TwoMorphism) -> Result<TwoMorphism> {
    if !same_one(&b1.target, &b2.source) {
        return Err(GerbeError::MorphismMismatch("vertical composition of non-composable 2-morphisms".into()));
    }
    let (a1, a2, a3) = (&b1.source, &b1.target, &b2.target);
    let eps = tolerance();
    let mut canon = Canon::new();
    for (v, z1, z3) in product_keys(a1, a3) {
        let mut out: Option<CMat> = None;
        for &z2 in a2.fiber(v, a1.s()[z1], a1.t()[z1]) {
            let m = b2.get(v, z2, z3) * b1.get(v, z1, z2);
            match &out {
                None => out = Some(m),
                Some(c) => {
                    if max_dev(c, &m) > eps {
                        return Err(GerbeError::DescentObstruction(format!("vertex {v} pair ({z1},{z3})")));
                    }
                }
            }
        }
        canon.insert((v, z1, z3), out.ok_or_else(|| GerbeError::EmptyRefinement(format!("vertex {v} pair ({z1},{z3})")))?);
    }
    Ok(TwoMorphism::from_canonical(a1.clone(), a3.clone(), canon))
}

/// `b2 ∘ b1` for `b1: A1 ⇒ A1'` (`G1 → G2`) and `b2: A2 ⇒ A2'` (`G2 → G3`).
/// Evaluated through the lexicographically smallest section over each
/// pair of outer indices and transported by `d`.
pub fn horizontal(b2: &TwoMorphism, b1: &TwoMorphism) -> Result<TwoMorphism> {
    let src = Arc::new(compose_1(&b2.source, &b1.source)?);
    let tgt = Arc::new(compose_1(&b2.target, &b1.target)?);
    horizontal_into(b2, b1, src, tgt)
}

/// The section `(y₂, z₁, z₁', z₂, z₂')` used over `(v, y₁, y₃)`.
fn section(b2: &TwoMorphism, b1: &TwoMorphism, v: usize, y1: usize, y3: usize) -> Option<[usize; 5]> {
    let g2 = b1.source.target().cover();
    for &y2 in g2.at_vertex(v) {
        let z1 = b1.source.fiber(v, y1, y2).first();
        let z1p = b1.target.fiber(v, y1, y2).first();
        let z2 = b2.source.fiber(v, y2, y3).first();
        let z2p = b2.target.fiber(v, y2, y3).first();
        if let (Some(&a), Some(&b), Some(&c), Some(&d)) = (z1, z1p, z2, z2p) {
            return Some([y2, a, b, c, d]);
        }
    }
    None
}

fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v = a.to_vec();
    v.extend_from_slice(b);
    v
}

pub(crate) fn horizontal_into(
    b2: &TwoMorphism,
    b1: &TwoMorphism,
    src: Arc<OneMorphism>,
    tgt: Arc<OneMorphism>,
) -> Result<TwoMorphism> {
    let mut sections: HashMap<(usize, usize, usize), (usize, usize)> = HashMap::default();
    let mut canon = Canon::new();
    for (v, zt, ztp) in product_keys(&src, &tgt) {
        let (y1, y3) = (src.s()[zt], src.t()[zt]);
        let (u, up) = match sections.get(&(v, y1, y3)) {
            Some(&x) => x,
            None => {
                let [_, z1, z1p, z2, z2p] = section(b2, b1, v, y1, y3).ok_or_else(|| GerbeError::EmptyRefinement(format!("no section at vertex {v}")))?;
                let u = src
                    .index_of(&concat(b1.source.comps(z1), b2.source.comps(z2)))
                    .ok_or_else(|| GerbeError::EmptyRefinement(format!("no section at vertex {v}")))?;
                let up = tgt
                    .index_of(&concat(b1.target.comps(z1p), b2.target.comps(z2p)))
                    .ok_or_else(|| GerbeError::EmptyRefinement(format!("no section at vertex {v}")))?;
                sections.insert((v, y1, y3), (u, up));
                (u, up)
            }
        };
        let split = |a: &OneMorphism, head: &[usize]| a.index_of(head).expect("split index");
        let (n1, n1p) = (b1.source.factors().len(), b1.target.factors().len());
        let (cu, cup, ct, ctp) = (src.comps(u), tgt.comps(up), src.comps(zt), tgt.comps(ztp));
        let (z1, z2) = (split(&b1.source, &cu[..n1]), split(&b2.source, &cu[n1..]));
        let (z1p, z2p) = (split(&b1.target, &cup[..n1p]), split(&b2.target, &cup[n1p..]));
        let (t1, t2) = (split(&b1.source, &ct[..n1]), split(&b2.source, &ct[n1..]));
        let (t1p, t2p) = (split(&b1.target, &ctp[..n1p]), split(&b2.target, &ctp[n1p..]));
        // d on each side factors through the two halves of the chain up to the
        // outer t_μ scalars, so the value is assembled half by half.
        let half = |b: &TwoMorphism, z: usize, zp: usize, t: usize, tp: usize| {
            b.target.alpha(v, zp, tp).adjoint() * b.get(v, z, zp) * b.source.alpha(v, t, z).adjoint()
        };
        let scalar = |a: &OneMorphism, k: usize| a.source().t_mu(v, a.s()[k]) * a.target().t_mu(v, a.t()[k]).conj();
        let m = kron(&half(b1, z1, z1p, t1, t1p), &half(b2, z2, z2p, t2, t2p)) * (scalar(&tgt, ztp) * scalar(&src, zt));
        canon.insert((v, zt, ztp), m);
    }
    Ok(TwoMorphism::from_canonical(src, tgt, canon))
}

/// The inverse of a 2-isomorphism.
pub fn inverse_2(b: &TwoMorphism) -> Result<TwoMorphism> {
    let eps = tolerance();
    let mut canon = Canon::new();
    for (&(v, z1, z2), m) in &b.canon {
        let inv = if m.is_square() && unitarity_defect(m) <= eps {
            m.adjoint()
        } else {
            m.clone().try_inverse().ok_or(GerbeError::NotInvertible(m.nrows()))?
        };
        canon.insert((v, z2, z1), inv);
    }
    Ok(TwoMorphism::from_canonical(b.target.clone(), b.source.clone(), canon))
}

/// `β*: A* ⇒ A'*`: the same values with tensor factors listed in reverse.
pub fn dual_2(b: &TwoMorphism) -> TwoMorphism {
    let (a1, a2) = (&b.source, &b.target);
    let (d1, d2) = (Arc::new(super::one::dual_1(a1)), Arc::new(super::one::dual_1(a2)));
    let dims = |a: &OneMorphism| -> Vec<usize> { a.factors().iter().map(|f| f.bundle.rank()).collect() };
    let (r1, r2) = (dims(a1), dims(a2));
    let rev = |a: &OneMorphism, d: &OneMorphism, z: usize| -> usize {
        let mut c = a.comps(z).to_vec();
        c.reverse();
        d.index_of(&c).expect("dual chain index")
    };
    let canon = b
        .canon
        .iter()
        .map(|(&(v, z1, z2), m)| {
            let m = if r1.len() == 1 && r2.len() == 1 { m.clone() } else { reverse_factors(m, &r2, &r1) };
            ((v, rev(a1, &d1, z1), rev(a2, &d2, z2)), m)
        })
        .collect();
    TwoMorphism::from_canonical(d1, d2, canon)
}

/// `f*β`.
pub fn pullback_2(b: &TwoMorphism, f: &SimplicialMap) -> Result<TwoMorphism> {
    let s = Arc::new(pullback_1(&b.source, f)?);
    let t = Arc::new(pullback_1(&b.target, f)?);
    let canon = product_keys(&s, &t)
        .into_iter()
        .map(|(x, z1, z2)| ((x, z1, z2), b.get(f.vertex(x), z1, z2).clone()))
        .collect();
    Ok(TwoMorphism::from_canonical(s, t, canon))
}

/// `β₁ ⊗ β₂: A1 ⊗ A2 ⇒ A1' ⊗ A2'`.
pub fn tensor_2(b1: &TwoMorphism, b2: &TwoMorphism) -> Result<TwoMorphism> {
    let src_g = Arc::new(b1.source.source().tensor(b2.source.source())?);
    let tgt_g = Arc::new(b1.source.target().tensor(b2.source.target())?);
    let (s, ps) = tensor_1_pairs(&b1.source, &b2.source, src_g.clone(), tgt_g.clone())?;
    let (t, pt) = tensor_1_pairs(&b1.target, &b2.target, src_g, tgt_g)?;
    let canon = product_keys(&s, &t)
        .into_iter()
        .map(|(v, k, kp)| {
            let (p, q) = (ps[k], pt[kp]);
            ((v, k, kp), kron(b1.get(v, p.0, q.0), b2.get(v, p.1, q.1)))
        })
        .collect();
    Ok(TwoMorphism::from_canonical(Arc::new(s), Arc::new(t), canon))
}

/// `λ_A: A ∘ id_G ⇒ A`.
pub fn left_unitor(a: &Arc<OneMorphism>) -> Result<TwoMorphism> {
    let id = identity_1(a.source());
    let src = Arc::new(compose_1(a, &id)?);
    let g2 = a.target();
    let canon = product_keys(&src, a)
        .into_iter()
        .map(|(v, zt, k0)| {
            let k = a.index_of(&src.comps(zt)[1..]).expect("split index");
            ((v, zt, k0), a.alpha(v, k0, k) * g2.t_mu(v, a.t()[k]))
        })
        .collect();
    Ok(TwoMorphism::from_canonical(src, a.clone(), canon))
}

/// `ρ_A: id_H ∘ A ⇒ A`.
pub fn right_unitor(a: &Arc<OneMorphism>) -> Result<TwoMorphism> {
    let id = identity_1(a.target());
    let src = Arc::new(compose_1(&id, a)?);
    let g1 = a.source();
    let m = a.factors().len();
    let canon = product_keys(&src, a)
        .into_iter()
        .map(|(v, zt, k0)| {
            let k = a.index_of(&src.comps(zt)[..m]).expect("split index");
            ((v, zt, k0), a.alpha(v, k, k0).adjoint() * g1.t_mu(v, a.s()[k]))
        })
        .collect();
    Ok(TwoMorphism::from_canonical(src, a.clone(), canon))
}

/// `A⁻¹` with `i_l: A⁻¹ ∘ A ⇒ id_G` and `i_r: id_H ⇒ A ∘ A⁻¹`, for rank 1.
pub struct Inverse {
    pub inverse: Arc<OneMorphism>,
    pub i_l: TwoMorphism,
    pub i_r: TwoMorphism,
}

pub fn invert_1(a: &Arc<OneMorphism>) -> Result<Inverse> {
    let inv = Arc::new(inverse_1(a)?);
    let m = a.factors().len();
    let split = |c: &[usize], first_inv: bool| -> (usize, usize) {
        let (x, y) = c.split_at(m);
        let (mut p, mut q) = (x.to_vec(), y.to_vec());
        if first_inv {
            p.reverse();
        } else {
            q.reverse();
        }
        (a.index_of(&p).expect("split index"), a.index_of(&q).expect("split index"))
    };
    let (g1, g2) = (a.source(), a.target());

    let id_g = Arc::new(identity_1(g1));
    let ll = Arc::new(compose_1(&inv, a)?);
    let canon = product_keys(&ll, &id_g)
        .into_iter()
        .map(|(v, zt, p)| {
            let (k1, k2) = split(ll.comps(zt), false);
            let x = g2.t_mu(v, a.t()[k1]).conj() * a.alpha(v, k1, k2)[(0, 0)].conj();
            ((v, zt, p), scalar(x))
        })
        .collect();
    let i_l = TwoMorphism::from_canonical(ll, id_g, canon);

    let id_h = Arc::new(identity_1(g2));
    let rr = Arc::new(compose_1(a, &inv)?);
    let canon = product_keys(&id_h, &rr)
        .into_iter()
        .map(|(v, p, zt)| {
            let (k1, k2) = split(rr.comps(zt), true);
            let x = g1.t_mu(v, a.s()[k1]) * a.alpha(v, k1, k2)[(0, 0)].conj();
            ((v, p, zt), scalar(x))
        })
        .collect();
    let i_r = TwoMorphism::from_canonical(id_h, rr, canon);
    Ok(Inverse { inverse: inv, i_l, i_r })
}

/// The mate `β#: A'⁻¹ ⇒ A⁻¹` of `β: A ⇒ A'` between rank-1 morphisms:
/// `λ • (id ∘ i_l) • (id ∘ β ∘ id) • (i_r ∘ id) • ρ⁻¹`.
pub fn mate(b: &TwoMorphism) -> Result<TwoMorphism> {
    let (a, ap) = (&b.source, &b.target);
    let ai = invert_1(a)?;
    let api = invert_1(ap)?;
    let a_inv = ai.inverse.clone();
    let ap_inv = api.inverse.clone();
    // ρ⁻¹: A'⁻¹ ⇒ id_G ∘ A'⁻¹
    let rho_inv = inverse_2(&right_unitor(&ap_inv)?)?;
    // i_r(A⁻¹): id_G ⇒ A⁻¹ ∘ A
    let ir = invert_1(&a_inv)?.i_r;
    let s1 = horizontal(&ir, &identity_2(&ap_inv))?;
    // id_{A⁻¹} ∘ β ∘ id_{A'⁻¹}
    let mid = horizontal(&identity_2(&a_inv), &horizontal(b, &identity_2(&ap_inv))?)?;
    // i_l(A'⁻¹): A' ∘ A'⁻¹ ⇒ id_H
    let il = invert_1(&ap_inv)?.i_l;
    let s3 = horizontal(&identity_2(&a_inv), &il)?;
    let lam = left_unitor(&a_inv)?;
    let mut out = vertical(&s1, &rho_inv)?;
    for step in [&mid, &s3, &lam] {
        out = vertical(step, &out)?;
    }
    Ok(out)
}
