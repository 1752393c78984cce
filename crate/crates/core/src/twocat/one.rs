//! 1-morphisms `(ζ, A, α)`. A 1-morphism is a chain of atomic factors; its
//! refinement and bundle are materialized by a left fold over the chain and
//! its `α` is evaluated on demand, so both bracketings of a triple composite
//! produce identical data.

use crate::bundle::DiscreteBundle;
use crate::error::{GerbeError, Result};
use crate::gerbe::BundleGerbe;
use crate::linalg::{approx_eq, identity, kron, scalar, tolerance, unitarity_defect, CMat};
use crate::report::Report;
use crate::site::{fiber_product, product_cover, Cover, Simplex};
use crate::surface::SimplicialMap;
use crate::HashMap;
use std::sync::Arc;

pub(crate) fn same_gerbe(a: &Arc<BundleGerbe>, b: &Arc<BundleGerbe>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// `α(v, k, k')` keyed `(v, k, k')`, as a map `A_{k'} → A_k`.
pub type AlphaTable = HashMap<(usize, usize, usize), CMat>;

/// A 1-morphism with explicitly stored data.
#[derive(Debug, Clone, PartialEq)]
pub struct Atomic {
    pub source: Arc<BundleGerbe>,
    pub target: Arc<BundleGerbe>,
    pub z: Arc<Cover>,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    pub bundle: DiscreteBundle,
    pub alpha: AlphaTable,
}

impl Atomic {
    /// Trace curvature forced by (1M1): `n·(C₂_{t(k)} − C₁_{s(k)})`.
    pub fn forced_curvature(
        source: &BundleGerbe,
        target: &BundleGerbe,
        s: &[usize],
        t: &[usize],
        rank: usize,
        k: usize,
        tri: usize,
    ) -> f64 {
        rank as f64 * (target.c(t[k], tri) - source.c(s[k], tri))
    }

    /// Replaces the bundle's stored curvature by the value forced by (1M1).
    pub fn with_forced_curvature(mut self) -> Self {
        let base = self.z.base().clone();
        let n = self.bundle.rank();
        let transport = self.bundle.transports().to_vec();
        let tc = (0..self.z.len())
            .map(|k| {
                (0..base.n_triangles())
                    .map(|tri| {
                        self.z.valid(k, Simplex::T(tri)).then(|| {
                            Self::forced_curvature(&self.source, &self.target, &self.s, &self.t, n, k, tri)
                        })
                    })
                    .collect()
            })
            .collect();
        self.bundle = DiscreteBundle::from_parts(self.z.clone(), n, transport, tc);
        self
    }
}

/// A 1-morphism `G → H`.
#[derive(Debug, Clone)]
pub struct OneMorphism {
    source: Arc<BundleGerbe>,
    target: Arc<BundleGerbe>,
    z: Arc<Cover>,
    s: Vec<usize>,
    t: Vec<usize>,
    bundle: DiscreteBundle,
    factors: Vec<Arc<Atomic>>,
    comps: Vec<Vec<usize>>,
    lookup: HashMap<Vec<usize>, usize>,
    fibers: HashMap<(usize, usize, usize), Vec<usize>>,
}

impl PartialEq for OneMorphism {
    fn eq(&self, other: &Self) -> bool {
        self.factors.len() == other.factors.len()
            && self.factors.iter().zip(&other.factors).all(|(a, b)| Arc::ptr_eq(a, b) || **a == **b)
    }
}

impl OneMorphism {
    /// Wraps an atomic morphism.
    pub fn atomic(a: Atomic) -> Self {
        Self::from_chain(vec![Arc::new(a)]).expect("single factor chain")
    }

    /// Materializes a chain `factors[0]` first.
    pub fn from_chain(factors: Vec<Arc<Atomic>>) -> Result<Self> {
        let first = factors.first().ok_or_else(|| GerbeError::MorphismMismatch("empty chain".into()))?;
        for w in factors.windows(2) {
            if !same_gerbe(&w[0].target, &w[1].source) {
                return Err(GerbeError::GerbeMismatch("target of a factor is not the source of the next".into()));
            }
        }
        let source = first.source.clone();
        let target = factors.last().unwrap().target.clone();
        if factors.len() == 1 {
            let a = first.clone();
            let comps: Vec<Vec<usize>> = (0..a.z.len()).map(|k| vec![k]).collect();
            return Ok(Self::finish(source, target, a.z.clone(), a.s.clone(), a.t.clone(), a.bundle.clone(), factors, comps));
        }
        let mut cover = (*first.z).clone();
        let mut comps: Vec<Vec<usize>> = (0..cover.len()).map(|k| vec![k]).collect();
        let mut s = first.s.clone();
        let mut t = first.t.clone();
        for f in &factors[1..] {
            let (pc, pairs) = product_cover(&cover, &f.z, |p, k| t[p] == f.s[k])?;
            comps = pairs
                .iter()
                .map(|&(p, k)| {
                    let mut c = comps[p].clone();
                    c.push(k);
                    c
                })
                .collect();
            s = pairs.iter().map(|&(p, _)| s[p]).collect();
            t = pairs.iter().map(|&(_, k)| f.t[k]).collect();
            cover = pc;
        }
        let z = Arc::new(cover);
        let base = z.base().clone();
        let rank: usize = factors.iter().map(|f| f.bundle.rank()).product();
        let transport = (0..z.len())
            .map(|k| {
                (0..base.n_edges())
                    .map(|e| {
                        z.valid(k, Simplex::E(e)).then(|| {
                            let mut m = factors[0].bundle.transport(comps[k][0], e).clone();
                            for (fi, f) in factors.iter().enumerate().skip(1) {
                                m = kron(&m, f.bundle.transport(comps[k][fi], e));
                            }
                            m
                        })
                    })
                    .collect()
            })
            .collect();
        let tc = (0..z.len())
            .map(|k| {
                (0..base.n_triangles())
                    .map(|tri| {
                        z.valid(k, Simplex::T(tri))
                            .then(|| Atomic::forced_curvature(&source, &target, &s, &t, rank, k, tri))
                    })
                    .collect()
            })
            .collect();
        let bundle = DiscreteBundle::from_parts(z.clone(), rank, transport, tc);
        Ok(Self::finish(source, target, z, s, t, bundle, factors, comps))
    }

    #[allow(clippy::too_many_arguments)]
    fn finish(
        source: Arc<BundleGerbe>,
        target: Arc<BundleGerbe>,
        z: Arc<Cover>,
        s: Vec<usize>,
        t: Vec<usize>,
        bundle: DiscreteBundle,
        factors: Vec<Arc<Atomic>>,
        comps: Vec<Vec<usize>>,
    ) -> Self {
        let lookup = comps.iter().enumerate().map(|(k, c)| (c.clone(), k)).collect();
        let mut fibers: HashMap<(usize, usize, usize), Vec<usize>> = HashMap::default();
        for v in 0..z.base().n_vertices() {
            for &k in z.at_vertex(v) {
                fibers.entry((v, s[k], t[k])).or_default().push(k);
            }
        }
        OneMorphism { source, target, z, s, t, bundle, factors, comps, lookup, fibers }
    }

    pub fn source(&self) -> &Arc<BundleGerbe> {
        &self.source
    }
    pub fn target(&self) -> &Arc<BundleGerbe> {
        &self.target
    }
    pub fn cover(&self) -> &Arc<Cover> {
        &self.z
    }
    pub fn s(&self) -> &[usize] {
        &self.s
    }
    pub fn t(&self) -> &[usize] {
        &self.t
    }
    pub fn bundle(&self) -> &DiscreteBundle {
        &self.bundle
    }
    pub fn rank(&self) -> usize {
        self.bundle.rank()
    }
    pub fn factors(&self) -> &[Arc<Atomic>] {
        &self.factors
    }
    pub fn comps(&self, k: usize) -> &[usize] {
        &self.comps[k]
    }
    pub fn index_of(&self, comps: &[usize]) -> Option<usize> {
        self.lookup.get(comps).copied()
    }
    /// Indices valid at `v` over the pair `(i, j)`, ascending.
    pub fn fiber(&self, v: usize, i: usize, j: usize) -> &[usize] {
        self.fibers.get(&(v, i, j)).map(|x| x.as_slice()).unwrap_or(&[])
    }
    pub fn is_atomic(&self) -> bool {
        self.factors.len() == 1
    }

    /// `α(v, k, k'): A_{k'} → A_k`, a Kronecker product over the chain.
    pub fn alpha(&self, v: usize, k: usize, kp: usize) -> CMat {
        let (c, cp) = (&self.comps[k], &self.comps[kp]);
        let get = |fi: usize| -> &CMat {
            self.factors[fi]
                .alpha
                .get(&(v, c[fi], cp[fi]))
                .unwrap_or_else(|| panic!("alpha missing at vertex {v}"))
        };
        let mut m = get(0).clone();
        for fi in 1..self.factors.len() {
            m = kron(&m, get(fi));
        }
        m
    }

    /// `d_A(v, k, k'): A_k → A_{k'}` for `k, k'` over the same pair.
    pub fn d(&self, v: usize, k: usize, kp: usize) -> CMat {
        if k == kp {
            return identity(self.rank());
        }
        debug_assert!(self.s[k] == self.s[kp] && self.t[k] == self.t[kp]);
        let c = self.source.t_mu(v, self.s[k]) * self.target.t_mu(v, self.t[k]).conj();
        self.alpha(v, k, kp).adjoint() * c
    }

    /// Turns the chain into one atomic morphism on the same refinement.
    pub fn atomize(&self) -> Atomic {
        if self.is_atomic() {
            return (*self.factors[0]).clone();
        }
        let mut alpha = HashMap::default();
        for v in 0..self.z.base().n_vertices() {
            for &k in self.z.at_vertex(v) {
                for &kp in self.z.at_vertex(v) {
                    alpha.insert((v, k, kp), self.alpha(v, k, kp));
                }
            }
        }
        Atomic {
            source: self.source.clone(),
            target: self.target.clone(),
            z: self.z.clone(),
            s: self.s.clone(),
            t: self.t.clone(),
            bundle: self.bundle.clone(),
            alpha,
        }
    }

    /// (1M1), (1M2), edge compatibility and bundle invariants. Chains are
    /// checked factor by factor; `full` also checks the composite directly.
    pub fn validate(&self, full: bool) -> Report {
        if self.factors.len() > 1 && !full {
            let mut r = Report::new();
            for (i, f) in self.factors.iter().enumerate() {
                r.merge(OneMorphism::atomic((**f).clone()).validate(true).prefixed(&format!("factor {i}: ")));
            }
            return r;
        }
        let eps = tolerance();
        let mut r = Report::new();
        let (g1, g2) = (&self.source, &self.target);
        let z = &self.z;
        let base = z.base();
        let n = self.rank();
        for k in 0..z.len() {
            if g1.cover().len() <= self.s[k] || g2.cover().len() <= self.t[k] {
                r.require("legs", false, || format!("index {k} leg out of range"));
                return r;
            }
            r.require("legs", z.support(k).is_subset(g1.cover().support(self.s[k])), || format!("index {k} source leg support"));
            r.require("legs", z.support(k).is_subset(g2.cover().support(self.t[k])), || format!("index {k} target leg support"));
        }
        for x in z.simplices() {
            for &i in g1.cover().at(x) {
                for &j in g2.cover().at(x) {
                    let hit = z.at(x).iter().any(|&k| self.s[k] == i && self.t[k] == j);
                    r.require("refinement surjective", hit, || format!("no index over ({i},{j}) on {x:?}"));
                }
            }
        }
        for v in self.bundle.violations() {
            r.require("bundle", false, || v);
        }
        if !r.is_ok() {
            return r;
        }
        for tri in 0..base.n_triangles() {
            for &k in z.at_triangle(tri) {
                let want = Atomic::forced_curvature(g1, g2, &self.s, &self.t, n, k, tri);
                r.require("1M1", self.bundle.trace_curv(k, tri) == want, || format!("index {} triangle {tri}", z.label_string(k)));
            }
        }
        for v in 0..base.n_vertices() {
            for &k in z.at_vertex(v) {
                for &kp in z.at_vertex(v) {
                    if self.factors.len() == 1 && !self.factors[0].alpha.contains_key(&(v, k, kp)) {
                        r.require("alpha present", false, || format!("vertex {v} ({k},{kp})"));
                        continue;
                    }
                    r.record("alpha unitary", unitarity_defect(&self.alpha(v, k, kp)), eps, || format!("vertex {v}"));
                }
            }
        }
        if !r.is_ok() {
            return r;
        }
        for e in 0..base.n_edges() {
            let [v0, v1] = base.edge(e);
            for &k in z.at_edge(e) {
                for &kp in z.at_edge(e) {
                    let u1 = g1.u(self.s[k], self.s[kp], e);
                    let u2 = g2.u(self.t[k], self.t[kp], e);
                    let lhs = self.alpha(v1, k, kp) * self.bundle.transport(kp, e) * u1;
                    let rhs = self.bundle.transport(k, e) * self.alpha(v0, k, kp) * u2;
                    r.record("alpha parallel", crate::linalg::max_dev(&lhs, &rhs), eps, || format!("edge {e} ({k},{kp})"));
                }
            }
        }
        for v in 0..base.n_vertices() {
            let ks = z.at_vertex(v);
            for &a in ks {
                for &b in ks {
                    let ab = self.alpha(v, a, b);
                    for &c in ks {
                        let m2 = g2.mu(v, self.t[a], self.t[b], self.t[c]);
                        let m1 = g1.mu(v, self.s[a], self.s[b], self.s[c]);
                        let lhs = &ab * self.alpha(v, b, c) * m2;
                        let rhs = self.alpha(v, a, c) * m1;
                        r.record("1M2", crate::linalg::max_dev(&lhs, &rhs), eps, || format!("vertex {v} ({a},{b},{c})"));
                    }
                }
            }
        }
        r
    }

    pub fn check(&self) -> Result<()> {
        let r = self.validate(false);
        match r.failed_laws().first() {
            None => Ok(()),
            Some(l) => Err(GerbeError::MorphismMismatch(format!("{l}: {:?}", r.laws[*l].locations))),
        }
    }

    /// The cocycle of `d_A` and its compatibility square with `α`.
    pub fn validate_d(&self, max_per_vertex: usize) -> Report {
        let eps = tolerance();
        let mut r = Report::new();
        let z = &self.z;
        for v in 0..z.base().n_vertices() {
            let ks = z.at_vertex(v);
            let mut groups: Vec<Vec<usize>> = Vec::new();
            let mut seen: HashMap<(usize, usize), usize> = HashMap::default();
            for &k in ks {
                let g = *seen.entry((self.s[k], self.t[k])).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[g].push(k);
            }
            let mut count = 0;
            for g in &groups {
                for &a in g {
                    r.record("d identity", crate::linalg::max_dev(&self.d_raw(v, a, a), &identity(self.rank())), eps, || format!("vertex {v} index {a}"));
                    for &b in g {
                        for &c in g {
                            let lhs = self.d(v, a, c);
                            let rhs = self.d(v, b, c) * self.d(v, a, b);
                            r.record("d cocycle", crate::linalg::max_dev(&lhs, &rhs), eps, || format!("vertex {v} ({a},{b},{c})"));
                        }
                    }
                }
            }
            'sq: for g in &groups {
                for h in &groups {
                    for &z1 in g {
                        for &z2 in g {
                            for &z3 in h {
                                for &z4 in h {
                                    let lhs = self.d(v, z1, z2) * self.alpha(v, z1, z3);
                                    let rhs = self.alpha(v, z2, z4) * self.d(v, z3, z4);
                                    r.record("d square", crate::linalg::max_dev(&lhs, &rhs), eps, || format!("vertex {v} ({z1},{z2},{z3},{z4})"));
                                    count += 1;
                                    if count >= max_per_vertex {
                                        break 'sq;
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        r
    }

    /// `d` evaluated by the formula even on the diagonal.
    fn d_raw(&self, v: usize, k: usize, kp: usize) -> CMat {
        let c = self.source.t_mu(v, self.s[k]) * self.target.t_mu(v, self.t[k]).conj();
        self.alpha(v, k, kp).adjoint() * c
    }
}

/// `id_G` on the pair cover: `A = L`, `α = μ_{i i' j'} · μ_{i j j'}⁻¹`.
pub fn identity_1(g: &Arc<BundleGerbe>) -> OneMorphism {
    let (z, legs) = fiber_product(&[g.cover(), g.cover()]).expect("same base");
    let z = Arc::new(z);
    let (s, t) = (legs[0].clone(), legs[1].clone());
    let base = z.base().clone();
    let transport = (0..z.len())
        .map(|k| {
            (0..base.n_edges())
                .map(|e| z.valid(k, Simplex::E(e)).then(|| scalar(g.u(s[k], t[k], e))))
                .collect()
        })
        .collect();
    let tc = (0..z.len())
        .map(|k| (0..base.n_triangles()).map(|tri| z.valid(k, Simplex::T(tri)).then(|| Atomic::forced_curvature(g, g, &s, &t, 1, k, tri))).collect())
        .collect();
    let bundle = DiscreteBundle::from_parts(z.clone(), 1, transport, tc);
    let mut alpha = HashMap::default();
    for v in 0..base.n_vertices() {
        for &k in z.at_vertex(v) {
            for &kp in z.at_vertex(v) {
                let (i, j, ip, jp) = (s[k], t[k], s[kp], t[kp]);
                alpha.insert((v, k, kp), scalar(g.mu(v, i, ip, jp) * g.mu(v, i, j, jp).conj()));
            }
        }
    }
    OneMorphism::atomic(Atomic { source: g.clone(), target: g.clone(), z, s, t, bundle, alpha })
}

/// `A2 ∘ A1` (apply `A1` first).
pub fn compose_1(a2: &OneMorphism, a1: &OneMorphism) -> Result<OneMorphism> {
    if !same_gerbe(&a1.target, &a2.source) {
        return Err(GerbeError::GerbeMismatch("target of the first morphism is not the source of the second".into()));
    }
    let mut chain = a1.factors.clone();
    chain.extend(a2.factors.iter().cloned());
    OneMorphism::from_chain(chain)
}

fn dual_atomic(a: &Atomic, source: Arc<BundleGerbe>, target: Arc<BundleGerbe>) -> Atomic {
    Atomic {
        source,
        target,
        z: a.z.clone(),
        s: a.t.clone(),
        t: a.s.clone(),
        bundle: a.bundle.clone(),
        alpha: a.alpha.clone(),
    }
}

/// `A*: H* → G*` for `A: G → H`: legs swapped, same bundle and matrices; a
/// chain dualizes to the reversed chain of duals.
pub fn dual_1(a: &OneMorphism) -> OneMorphism {
    let mut duals: HashMap<*const BundleGerbe, Arc<BundleGerbe>> = HashMap::default();
    let mut dual_of = |g: &Arc<BundleGerbe>| -> Arc<BundleGerbe> {
        duals.entry(Arc::as_ptr(g)).or_insert_with(|| Arc::new(g.dual())).clone()
    };
    let chain: Vec<Arc<Atomic>> = a
        .factors
        .iter()
        .rev()
        .map(|f| {
            let (s, t) = (dual_of(&f.target), dual_of(&f.source));
            Arc::new(dual_atomic(f, s, t))
        })
        .collect();
    OneMorphism::from_chain(chain).expect("dual chain composes")
}

fn inverse_atomic(a: &Atomic) -> Atomic {
    Atomic {
        source: a.target.clone(),
        target: a.source.clone(),
        z: a.z.clone(),
        s: a.t.clone(),
        t: a.s.clone(),
        bundle: a.bundle.dual(),
        alpha: a.alpha.iter().map(|(k, m)| (*k, m.map(|x| x.conj()))).collect(),
    }
}

/// `A⁻¹` for rank-1 `A`: reversed chain of factor inverses, each on the same
/// refinement with legs swapped, dual line bundle and conjugate `α`.
pub fn inverse_1(a: &OneMorphism) -> Result<OneMorphism> {
    if a.rank() != 1 {
        return Err(GerbeError::NotInvertible(a.rank()));
    }
    let chain = a.factors.iter().rev().map(|f| Arc::new(inverse_atomic(f))).collect();
    OneMorphism::from_chain(chain)
}

/// Pulls every factor back along `f`; shared gerbes stay shared.
pub fn pullback_1(a: &OneMorphism, f: &SimplicialMap) -> Result<OneMorphism> {
    let mut gerbes = vec![Arc::new(a.source.pullback(f)?)];
    for fac in &a.factors {
        gerbes.push(Arc::new(fac.target.pullback(f)?));
    }
    let mut chain = Vec::new();
    for (i, fac) in a.factors.iter().enumerate() {
        let z = Arc::new(fac.z.pullback(f)?);
        let bundle = fac.bundle.pullback(f, z.clone())?;
        let mut alpha = HashMap::default();
        for x in 0..z.base().n_vertices() {
            for &k in z.at_vertex(x) {
                for &kp in z.at_vertex(x) {
                    alpha.insert((x, k, kp), fac.alpha[&(f.vertex(x), k, kp)].clone());
                }
            }
        }
        chain.push(Arc::new(Atomic {
            source: gerbes[i].clone(),
            target: gerbes[i + 1].clone(),
            z,
            s: fac.s.clone(),
            t: fac.t.clone(),
            bundle,
            alpha,
        }));
    }
    OneMorphism::from_chain(chain)
}

/// `A1 ⊗ A2: G1 ⊗ G2 → H1 ⊗ H2`, materialized as one atomic morphism.
pub fn tensor_1(a1: &OneMorphism, a2: &OneMorphism) -> Result<OneMorphism> {
    let src = Arc::new(a1.source.tensor(&a2.source)?);
    let tgt = Arc::new(a1.target.tensor(&a2.target)?);
    Ok(tensor_1_pairs(a1, a2, src, tgt)?.0)
}

/// As [`tensor_1`] with the tensor gerbes supplied so they can be shared;
/// also returns the factor pair of every index.
pub fn tensor_1_pairs(
    a1: &OneMorphism,
    a2: &OneMorphism,
    src: Arc<BundleGerbe>,
    tgt: Arc<BundleGerbe>,
) -> Result<(OneMorphism, Vec<(usize, usize)>)> {
    let (z, pairs) = product_cover(&a1.z, &a2.z, |_, _| true)?;
    let z = Arc::new(z);
    let pair_index = |c: &Cover, i: usize, j: usize, c1: &Cover, c2: &Cover| -> usize {
        let mut l = c1.label(i).clone();
        l.extend(c2.label(j).iter().cloned());
        c.find_label(&l).expect("overlapping legs have a product index")
    };
    let s: Vec<usize> = pairs
        .iter()
        .map(|&(k1, k2)| pair_index(src.cover(), a1.s[k1], a2.s[k2], a1.source.cover(), a2.source.cover()))
        .collect();
    let t: Vec<usize> = pairs
        .iter()
        .map(|&(k1, k2)| pair_index(tgt.cover(), a1.t[k1], a2.t[k2], a1.target.cover(), a2.target.cover()))
        .collect();
    let b1 = a1.bundle.reindex(z.clone(), &pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let b2 = a2.bundle.reindex(z.clone(), &pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    let bundle = b1.tensor(&b2)?;
    let mut alpha = HashMap::default();
    for v in 0..z.base().n_vertices() {
        for &k in z.at_vertex(v) {
            for &kp in z.at_vertex(v) {
                let (p, q) = (pairs[k], pairs[kp]);
                alpha.insert((v, k, kp), kron(&a1.alpha(v, p.0, q.0), &a2.alpha(v, p.1, q.1)));
            }
        }
    }
    let at = Atomic { source: src, target: tgt, z, s, t, bundle, alpha }.with_forced_curvature();
    Ok((OneMorphism::atomic(at), pairs))
}

/// Builds an atomic morphism from parts, forcing (1M1) curvature, and validates it.
pub fn atomic_checked(a: Atomic) -> Result<OneMorphism> {
    let m = OneMorphism::atomic(a.with_forced_curvature());
    m.check()?;
    Ok(m)
}

/// Deviation between the α's of two morphisms on the same refinement.
pub fn alpha_deviation(a: &OneMorphism, b: &OneMorphism) -> f64 {
    let mut m: f64 = 0.0;
    for v in 0..a.z.base().n_vertices() {
        for &k in a.z.at_vertex(v) {
            for &kp in a.z.at_vertex(v) {
                let x = a.alpha(v, k, kp);
                let y = b.alpha(v, k, kp);
                if !approx_eq(&x, &y, f64::INFINITY) {
                    return f64::INFINITY;
                }
                m = m.max(crate::linalg::max_dev(&x, &y));
            }
        }
    }
    m
}
