//! Trivializations and the three surface holonomies: closed oriented
//! surfaces, surfaces whose boundary ends on a D-brane, and unoriented
//! surfaces through Jandl structures on the orientation double cover.

use crate::bundle::DiscreteBundle;
use crate::error::{GerbeError, Result};
use crate::gerbe::BundleGerbe;
use crate::linalg::{cis, scalar, tolerance, CMat, C64};
use crate::normalize::{bun, normalize_1, solve_2iso};
use crate::report::Report;
use crate::site::Simplex;
use crate::surface::{
    boundary_complex, domain_boundary, Cycle, EdgeImage, FundamentalDomain, Involution, OrientationCover,
    SimplicialMap, SimplicialSurface, Step,
};
use crate::twocat::{
    compose_1, dual_1, dual_2, horizontal, identity_1, identity_2, inverse_1, inverse_2, pullback_1, pullback_2,
    vertical, Atomic, OneMorphism, TwoMorphism,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use crate::HashMap;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A 1-isomorphism `T: G → I_ρ` with its `ρ`.
#[derive(Debug, Clone)]
pub struct Trivialization {
    pub iso: Arc<OneMorphism>,
    pub rho: Vec<f64>,
    pub trivial: Arc<BundleGerbe>,
}

/// Picks one index from a nonempty candidate list: the least for seed 0,
/// otherwise uniformly at random.
struct Chooser(Option<ChaCha8Rng>);

impl Chooser {
    fn new(seed: u64) -> Self {
        Chooser((seed != 0).then(|| ChaCha8Rng::seed_from_u64(seed)))
    }
    fn pick(&mut self, cands: &[usize]) -> usize {
        match &mut self.0 {
            None => *cands.iter().min().expect("covers are surjective"),
            Some(rng) => cands[rng.random_range(0..cands.len())],
        }
    }
}

/// Builds a trivialization by index assignment. With anchor `a(v)` at each
/// vertex, `α(v, i, j) = μ(v, i, j, a(v))`; transports are fixed by one
/// anchor per edge and `ρ` by one anchor per triangle. `I_ρ` itself gets the
/// identity.
pub fn trivialize(g: &Arc<BundleGerbe>, seed: u64) -> Result<Trivialization> {
    g.check()?;
    if let Some(rho) = g.trivial_rho() {
        return Ok(Trivialization { iso: Arc::new(identity_1(g)), rho, trivial: g.clone() });
    }
    let z = g.cover().clone();
    let base = z.base().clone();
    let mut choose = Chooser::new(seed);
    let va: Vec<usize> = (0..base.n_vertices()).map(|v| choose.pick(z.at_vertex(v))).collect();
    let h = |v: usize, i: usize, j: usize| g.mu(v, i, j, va[v]);
    let mut transport: Vec<Vec<Option<CMat>>> = vec![vec![None; base.n_edges()]; z.len()];
    for e in 0..base.n_edges() {
        let [v0, v1] = base.edge(e);
        let b = choose.pick(z.at_edge(e));
        for &i in z.at_edge(e) {
            let x = h(v1, i, b) * g.u(i, b, e) * h(v0, i, b).conj();
            transport[i][e] = Some(scalar(x));
        }
    }
    let tc = vec![vec![None; base.n_triangles()]; z.len()];
    let provisional = DiscreteBundle::from_parts(z.clone(), 1, transport.clone(), tc);
    let rho: Vec<f64> = (0..base.n_triangles())
        .map(|t| {
            let i0 = choose.pick(z.at_triangle(t));
            g.c(i0, t) + provisional.triangle_holonomy(i0, t)[(0, 0)].arg()
        })
        .collect();
    let trivial = Arc::new(BundleGerbe::trivial(base.clone(), &rho));
    let mut alpha = HashMap::default();
    for v in 0..base.n_vertices() {
        for &i in z.at_vertex(v) {
            for &j in z.at_vertex(v) {
                alpha.insert((v, i, j), scalar(h(v, i, j)));
            }
        }
    }
    let a = Atomic {
        source: g.clone(),
        target: trivial.clone(),
        z: z.clone(),
        s: (0..z.len()).collect(),
        t: vec![0; z.len()],
        bundle: DiscreteBundle::from_parts(z.clone(), 1, transport, vec![vec![None; base.n_triangles()]; z.len()]),
        alpha,
    };
    let iso = OneMorphism::atomic(a.with_forced_curvature());
    iso.check()?;
    Ok(Trivialization { iso: Arc::new(iso), rho, trivial })
}

/// `Σ_t o(t)·ρ(t)` over the oriented triangles of `base`.
pub fn integrate(base: &SimplicialSurface, rho: &[f64]) -> Result<f64> {
    let o = base.orientation().ok_or(GerbeError::NotOriented)?;
    Ok(rho.iter().zip(o).map(|(r, &s)| r * s as f64).sum())
}

/// `exp(i ∫ρ)` for a trivialization of `G` over a closed oriented surface.
pub fn holonomy_closed(g: &Arc<BundleGerbe>) -> Result<C64> {
    holonomy_closed_seeded(g, 0)
}

pub fn holonomy_closed_seeded(g: &Arc<BundleGerbe>, seed: u64) -> Result<C64> {
    let base = g.base();
    if !base.is_closed() {
        return Err(GerbeError::NotClosed);
    }
    let t = trivialize(g, seed)?;
    Ok(cis(integrate(base, &t.rho)?))
}

/// Holonomy of `G` around `φ: Σ → M`.
pub fn holonomy_closed_along(g: &BundleGerbe, phi: &SimplicialMap, seed: u64) -> Result<C64> {
    holonomy_closed_seeded(&Arc::new(g.pullback(phi)?), seed)
}

/// A brane: a subcomplex `Q` of the base with a left module `E: G|_Q → I_ω`.
#[derive(Debug, Clone)]
pub struct DBrane {
    pub q: Arc<SimplicialSurface>,
    pub inclusion: SimplicialMap,
    pub module: Arc<OneMorphism>,
}

impl DBrane {
    pub fn new(g: &BundleGerbe, inclusion: SimplicialMap, module: Arc<OneMorphism>) -> Result<Self> {
        if **module.source() != g.pullback(&inclusion)? {
            return Err(GerbeError::GerbeMismatch("module source is not the restricted gerbe".into()));
        }
        module.target().require_trivial()?;
        module.check()?;
        Ok(DBrane { q: inclusion.source.clone(), inclusion, module })
    }
}

/// Translates a cycle of `s` into the boundary complex `b` whose vertex
/// `x` sits over `s`-vertex `j.vertex(x)`.
fn cycle_into(s: &SimplicialSurface, b: &SimplicialSurface, j: &SimplicialMap, c: &Cycle) -> Result<Cycle> {
    let pos: BTreeMap<usize, usize> = j.vertex_map().iter().enumerate().map(|(x, &v)| (v, x)).collect();
    let steps = c
        .steps
        .iter()
        .map(|st| {
            let (a, h) = (pos[&st.tail(s)], pos[&st.head(s)]);
            let (edge, sign) = b.find_edge(a, h).ok_or(GerbeError::BoundaryNotOnBrane)?;
            Ok(Step { edge, forward: sign > 0 })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Cycle { steps })
}

/// `exp(i∫ρ) · Π_c tr hol_E(c)` over the boundary cycles `c` of `Σ`, with
/// `E = Bun(ψ*E ∘ (j*T)⁻¹)` on the boundary.
pub fn holonomy_dbrane(g: &BundleGerbe, brane: &DBrane, phi: &SimplicialMap, seed: u64) -> Result<C64> {
    let sigma = phi.source.clone();
    let gs = Arc::new(g.pullback(phi)?);
    let t = trivialize(&gs, seed)?;
    let (b, j) = boundary_complex(&sigma)?;
    let inc_pos: BTreeMap<usize, usize> =
        brane.inclusion.vertex_map().iter().enumerate().map(|(q, &m)| (m, q)).collect();
    let vmap = (0..b.n_vertices())
        .map(|x| inc_pos.get(&phi.vertex(j.vertex(x))).copied().ok_or(GerbeError::BoundaryNotOnBrane))
        .collect::<Result<Vec<_>>>()?;
    let psi = SimplicialMap::new(b.clone(), brane.q.clone(), vmap).map_err(|_| GerbeError::BoundaryNotOnBrane)?;
    let e_psi = pullback_1(&brane.module, &psi)?;
    let jt_inv = inverse_1(&pullback_1(&t.iso, &j)?)?;
    let e = bun(&Arc::new(compose_1(&e_psi, &jt_inv)?))?.bundle;
    let mut value = cis(integrate(&sigma, &t.rho)?);
    for c in sigma.boundary_cycles()? {
        let cb = cycle_into(&sigma, &b, &j, &c)?;
        let zeros = vec![0; cb.len()];
        value *= e.trace_holonomy(&cb, &zeros, &|_, _, _| unreachable!("single index"))?;
    }
    Ok(value)
}

/// `E ↦ E ∘ A⁻¹`: left `G`-modules to left `G'`-modules along `A: G → G'`.
pub fn transport_left_module(e: &OneMorphism, a: &OneMorphism) -> Result<OneMorphism> {
    compose_1(e, &inverse_1(a)?)
}

/// `F ↦ A ∘ F`: right `G`-modules to right `G'`-modules.
pub fn transport_right_module(f: &OneMorphism, a: &OneMorphism) -> Result<OneMorphism> {
    if a.rank() != 1 {
        return Err(GerbeError::NotInvertible(a.rank()));
    }
    compose_1(a, f)
}

/// A left `G`-module `E: G → I_ω` as the right `G*`-module `E*: I_{-ω} → G*`.
pub fn module_dual(e: &OneMorphism) -> OneMorphism {
    dual_1(e)
}

/// `(k, A, φ)` with `A: k*G → G*` and `φ: k*A ⇒ A*`.
#[derive(Debug, Clone)]
pub struct JandlStructure {
    pub k: Involution,
    pub a: Arc<OneMorphism>,
    pub phi: TwoMorphism,
}

pub fn jandl_validate(g: &BundleGerbe, j: &JandlStructure) -> Report {
    let mut r = Report::new();
    let k = j.k.map();
    match g.pullback(k) {
        Ok(kg) => r.require("source is k*G", **j.a.source() == kg, String::new),
        Err(e) => r.require("source is k*G", false, || e.to_string()),
    }
    r.require("target is G*", **j.a.target() == g.dual(), String::new);
    r.require("rank 1", j.a.rank() == 1, || format!("rank {}", j.a.rank()));
    if !r.is_ok() {
        return r;
    }
    r.merge(j.a.validate(false).prefixed("A: "));
    let ka = match pullback_1(&j.a, k) {
        Ok(x) => x,
        Err(e) => {
            r.require("phi ends", false, || e.to_string());
            return r;
        }
    };
    r.require("phi ends", **j.phi.source() == ka && **j.phi.target() == dual_1(&j.a), String::new);
    if !r.is_ok() {
        return r;
    }
    r.merge(j.phi.validate().prefixed("phi: "));
    let lhs = pullback_2(&j.phi, k);
    let rhs = inverse_2(&dual_2(&j.phi));
    let dev = match (lhs, rhs) {
        (Ok(l), Ok(r)) => l.max_deviation(&r),
        _ => f64::INFINITY,
    };
    r.record("k*phi = phi*^-1", dev, tolerance(), String::new);
    r
}

/// Checks that `β: A ⇒ A'` commutes with `φ` and `φ'`: `φ' • k*β = β* • φ`.
pub fn jandl_morphism(j1: &JandlStructure, j2: &JandlStructure, beta: &TwoMorphism) -> Report {
    let mut r = Report::new();
    r.require("same involution", j1.k == j2.k, String::new);
    r.require("ends", **beta.source() == *j1.a && **beta.target() == *j2.a, String::new);
    if !r.is_ok() {
        return r;
    }
    r.merge(beta.validate().prefixed("beta: "));
    let lhs = pullback_2(beta, j1.k.map()).and_then(|kb| vertical(&j2.phi, &kb));
    let rhs = vertical(&dual_2(beta), &j1.phi);
    let dev = match (lhs, rhs) {
        (Ok(l), Ok(r)) => l.max_deviation(&r),
        _ => f64::INFINITY,
    };
    r.record("square", dev, tolerance(), String::new);
    r
}

/// A morphism `J → J'` if one exists: a 2-isomorphism `A ⇒ A'` rescaled per
/// component so that the square commutes.
pub fn jandl_equivalent(j1: &JandlStructure, j2: &JandlStructure) -> Option<TwoMorphism> {
    if j1.k != j2.k {
        return None;
    }
    let b0 = solve_2iso(&j1.a, &j2.a)?;
    let k = j1.k.map();
    let lhs = vertical(&j2.phi, &pullback_2(&b0, k).ok()?).ok()?;
    let rhs = vertical(&dual_2(&b0), &j1.phi).ok()?;
    let base = j1.a.source().base().clone();
    let comp = base.vertex_components();
    let ratio: Vec<C64> = (0..base.n_vertices())
        .map(|v| {
            let (z1, z2) = first_key(&lhs, v);
            rhs.get(v, z1, z2)[(0, 0)] / lhs.get(v, z1, z2)[(0, 0)]
        })
        .collect();
    // c(kv) / c(v) must equal ratio(v)
    let n_comp = comp.iter().max().map_or(0, |m| m + 1);
    let mut c: Vec<Option<C64>> = vec![None; n_comp];
    for v in 0..base.n_vertices() {
        let (cv, ckv) = (comp[v], comp[k.vertex(v)]);
        if c[cv].is_none() {
            c[cv] = Some(C64::new(1.0, 0.0));
        }
        if c[ckv].is_none() {
            c[ckv] = Some(c[cv].unwrap() * ratio[v]);
        }
    }
    let canon = b0.canon().iter().map(|(&(v, z1, z2), m)| ((v, z1, z2), m * c[comp[v]].unwrap())).collect();
    let b = TwoMorphism::from_canonical(j1.a.clone(), j2.a.clone(), canon);
    jandl_morphism(j1, j2, &b).is_ok().then_some(b)
}

fn first_key(b: &TwoMorphism, v: usize) -> (usize, usize) {
    let (&(_, z1, z2), _) = b.canon().range((v, 0, 0)..(v + 1, 0, 0)).next().expect("every vertex has a key");
    (z1, z2)
}

/// `J_B`: a Jandl structure on `G'` moved to `G` along `B: G → G'`, with
/// `A' = B* ∘ A ∘ k*B` and `φ' = id_{k*B*} ∘ φ ∘ id_B`.
pub fn jandl_transport(b: &Arc<OneMorphism>, j: &JandlStructure) -> Result<JandlStructure> {
    if b.rank() != 1 {
        return Err(GerbeError::NotInvertible(b.rank()));
    }
    let k = j.k.map();
    let kb = pullback_1(b, k)?;
    let a2 = Arc::new(compose_1(&dual_1(b), &compose_1(&j.a, &kb)?)?);
    let kbd = Arc::new(pullback_1(&dual_1(b), k)?);
    let phi = horizontal(&identity_2(&kbd), &horizontal(&j.phi, &identity_2(b))?)?;
    let (src, tgt) = (Arc::new(pullback_1(&a2, k)?), Arc::new(dual_1(&a2)));
    if **phi.source() != *src || **phi.target() != *tgt {
        return Err(GerbeError::MorphismMismatch("transported phi has unexpected ends".into()));
    }
    let phi = TwoMorphism::from_canonical(src, tgt, phi.canon().clone());
    Ok(JandlStructure { k: j.k.clone(), a: a2, phi })
}

/// `J_B(β) = id_{B*} ∘ β ∘ id_{k*B}` for a morphism `β: A ⇒ A'` of Jandl
/// structures on `G'`.
pub fn jandl_transport_morphism(b: &Arc<OneMorphism>, k: &Involution, beta: &TwoMorphism) -> Result<TwoMorphism> {
    let kb = Arc::new(pullback_1(b, k.map())?);
    let bd = Arc::new(dual_1(b));
    horizontal(&identity_2(&bd), &horizontal(beta, &identity_2(&kb))?)
}

/// `β_J = β* ∘ id_A ∘ k*β: J_B(J) → J_{B'}(J)` for `β: B ⇒ B'`.
pub fn jandl_transport_2iso(beta: &TwoMorphism, j: &JandlStructure) -> Result<TwoMorphism> {
    let kbeta = pullback_2(beta, j.k.map())?;
    horizontal(&dual_2(beta), &horizontal(&identity_2(&j.a), &kbeta)?)
}

/// A line bundle on the one-index cover with `φ̂(x): R̂_{k(x)} → R̂_x`.
#[derive(Debug, Clone)]
pub struct EquivariantLineBundle {
    pub k: Involution,
    pub line: DiscreteBundle,
    pub phi: Vec<C64>,
}

impl EquivariantLineBundle {
    /// Transport of `k*R̂` along edge `e`.
    pub fn pulled_transport(&self, e: usize) -> C64 {
        match self.k.map().edge(e) {
            EdgeImage::Edge { edge, sign } => {
                let u = self.line.transport(0, edge)[(0, 0)];
                if sign > 0 {
                    u
                } else {
                    u.conj()
                }
            }
            EdgeImage::Vertex(_) => C64::new(1.0, 0.0),
        }
    }

    /// Equivariance `φ̂ · k*φ̂ = 1` and compatibility with the connection.
    pub fn validate(&self) -> Report {
        let eps = tolerance();
        let mut r = Report::new();
        let base = self.line.cover().base().clone();
        let k = self.k.map();
        for x in 0..base.n_vertices() {
            let d = (self.phi[x] * self.phi[k.vertex(x)] - 1.0).norm();
            r.record("equivariance", d, eps, || format!("vertex {}", base.name(x)));
        }
        for e in 0..base.n_edges() {
            let [x0, x1] = base.edge(e);
            let lhs = self.phi[x1] * self.pulled_transport(e);
            let rhs = self.line.transport(0, e)[(0, 0)] * self.phi[x0];
            r.record("phi parallel", (lhs - rhs).norm(), eps, || format!("edge {e}"));
        }
        r
    }
}

/// `Bun(A)` and `Bun(φ)` for a Jandl structure on a trivial gerbe, with
/// `Bun(φ)` read through the identifications `Bun(k*A) = k*Bun(A)` and
/// `Bun(A*) = Bun(A)` induced by the normalization of `A`.
pub fn jandl_to_equivariant(j: &JandlStructure) -> Result<EquivariantLineBundle> {
    j.a.source().require_trivial()?;
    j.a.target().require_trivial()?;
    let n = normalize_1(&j.a)?;
    let ki = pullback_2(&n.iso, j.k.map())?;
    let di = dual_2(&n.iso);
    let phi_s = vertical(&inverse_2(&di)?, &vertical(&j.phi, &ki)?)?;
    let nv = j.a.source().base().n_vertices();
    let phi = (0..nv).map(|x| phi_s.get(x, 0, 0)[(0, 0)]).collect();
    Ok(EquivariantLineBundle { k: j.k.clone(), line: n.fp.bundle().clone(), phi })
}

/// Holonomy of the descended bundle `R` along the projected domain
/// boundary. `lift(step)` names the cover edge over each step; fibres are
/// spliced by `φ̂` where consecutive lifts disagree.
pub fn descended_holonomy(
    oc: &OrientationCover,
    r: &EquivariantLineBundle,
    cycles: &[Cycle],
    lift: &dyn Fn(Step) -> usize,
) -> C64 {
    let (base, cover) = (&oc.base, &oc.cover);
    let mut total = C64::new(1.0, 0.0);
    for c in cycles {
        let mut h = C64::new(1.0, 0.0);
        let mut first_tail = None;
        let mut prev_head: Option<usize> = None;
        for st in &c.steps {
            let le = lift(*st);
            let [c0, c1] = cover.edge(le);
            let along = oc.pr.vertex(c0) == st.tail(base);
            let (tail, head) = if along { (c0, c1) } else { (c1, c0) };
            if let Some(p) = prev_head {
                if p != tail {
                    h *= r.phi[tail];
                }
            }
            first_tail.get_or_insert(tail);
            let u = r.line.transport(0, le)[(0, 0)];
            h *= if along { u } else { u.conj() };
            prev_head = Some(head);
        }
        if let (Some(f), Some(p)) = (first_tail, prev_head) {
            if f != p {
                h *= r.phi[f];
            }
        }
        total *= h;
    }
    total
}

/// `exp(i ∫_F ρ) · hol_R(∂F̄)` for `G` on the cover `Σ̂` with a Jandl
/// structure whose involution is the deck involution.
pub fn holonomy_unoriented(
    g: &Arc<BundleGerbe>,
    j: &JandlStructure,
    oc: &OrientationCover,
    f: &FundamentalDomain,
    seed: u64,
) -> Result<C64> {
    if **g.base() != *oc.cover || j.k != oc.sigma {
        return Err(GerbeError::NotEquivariant("gerbe or involution does not live on the orientation cover".into()));
    }
    if !f.is_valid(oc) {
        return Err(GerbeError::NotEquivariant("invalid fundamental domain".into()));
    }
    let report = jandl_validate(g, j);
    if !report.is_ok() {
        return Err(GerbeError::NotEquivariant(format!("Jandl structure fails {:?}", report.failed_laws())));
    }
    let t = trivialize(g, seed)?;
    let t_inv = Arc::new(inverse_1(&t.iso)?);
    let jr = jandl_transport(&t_inv, j)?;
    let r = jandl_to_equivariant(&jr)?;
    let rep = r.validate();
    if !rep.is_ok() {
        return Err(GerbeError::NotEquivariant(format!("equivariant line fails {:?}", rep.failed_laws())));
    }
    let lifted: BTreeMap<usize, usize> = f.boundary_edges(oc).iter().map(|b| (b.step.edge, b.lifted_edge)).collect();
    let cycles = domain_boundary(oc, f)?;
    let hol_r = descended_holonomy(oc, &r, &cycles, &|st| lifted[&st.edge]);
    let area: f64 = f.triangles(oc).iter().map(|&t_hat| t.rho[t_hat] * oc.cover.orientation_sign(t_hat).unwrap_or(1) as f64).sum();
    let value = cis(area) * hol_r;
    if (value.norm() - 1.0).abs() > tolerance() {
        return Err(GerbeError::NotEquivariant(format!("holonomy {value} is not a unit complex number")));
    }
    Ok(value)
}

/// A Jandl structure on `I_ρ` over the orientation cover with line
/// `N ⊗ σ*N` and constant `φ̂ = ε`. It exists when `ρ + σ*ρ = −(θ_N + σ*θ_N)`
/// for the curvature lift `θ_N` of `N`.
pub fn product_jandl(
    trivial: &Arc<BundleGerbe>,
    sigma: &Involution,
    n_phase: &[C64],
    epsilon: C64,
) -> Result<JandlStructure> {
    let k = sigma.map();
    let src = Arc::new(trivial.pullback(k)?);
    let tgt = Arc::new(trivial.dual());
    let base = trivial.base().clone();
    let pc = crate::normalize::pair_cover(&src, &tgt)?;
    let pulled = |e: usize| match k.edge(e) {
        EdgeImage::Edge { edge, sign } => {
            if sign > 0 {
                n_phase[edge]
            } else {
                n_phase[edge].conj()
            }
        }
        EdgeImage::Vertex(_) => C64::new(1.0, 0.0),
    };
    let transport = vec![(0..base.n_edges())
        .map(|e| pc.cover.valid(0, Simplex::E(e)).then(|| scalar(n_phase[e] * pulled(e))))
        .collect()];
    let bundle = DiscreteBundle::from_parts(pc.cover.clone(), 1, transport, vec![vec![None; base.n_triangles()]]);
    let alpha = (0..base.n_vertices()).map(|v| ((v, 0, 0), scalar(C64::new(1.0, 0.0)))).collect();
    let a = Atomic { source: src, target: tgt, z: pc.cover.clone(), s: pc.s.clone(), t: pc.t.clone(), bundle, alpha };
    let a = Arc::new(OneMorphism::atomic(a.with_forced_curvature()));
    a.check()?;
    let ka = Arc::new(pullback_1(&a, k)?);
    let ad = Arc::new(dual_1(&a));
    let canon = crate::twocat::product_keys(&ka, &ad).into_iter().map(|key| (key, scalar(epsilon))).collect();
    let phi = TwoMorphism::new(ka, ad, canon)?;
    Ok(JandlStructure { k: sigma.clone(), a, phi })
}
