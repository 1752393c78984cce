//! Canonical example scenarios.

use super::scenario::{HolonomyDoc, Mode, Scenario, Writer};
use crate::bundle::DiscreteBundle;
use crate::error::{GerbeError, Result};
use crate::gerbe::BundleGerbe;
use crate::holonomy::{jandl_transport, product_jandl, DBrane, JandlStructure};
use crate::linalg::{cis, identity, CMat, C64};
use crate::random::{random_rho, random_trivialized, random_twist};
use crate::surface::builders::{klein_bottle, octahedron, rp2, square_disc, torus7};
use crate::surface::{boundary_complex, orientation_cover, OrientationCover, SimplicialSurface};
use crate::twocat::{compose_1, pullback_1, Atomic, OneMorphism};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Example {
    Sphere,
    Torus,
    Klein,
    Rp2,
    DiscBrane,
    RandomGauge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum JandlKind {
    Trivial,
    Twisted,
}

#[derive(Debug, Clone)]
pub struct ExampleParams {
    /// Total of `ρ` (closed examples) or the brane phase (disc-brane).
    pub theta: f64,
    pub seed: u64,
    /// Cover indices of the gauge gerbe; 0 or 1 keeps the trivial gerbe.
    pub indices: usize,
    pub rank: usize,
    pub jandl: JandlKind,
}

impl Default for ExampleParams {
    fn default() -> Self {
        ExampleParams { theta: std::f64::consts::FRAC_PI_2, seed: 0, indices: 0, rank: 1, jandl: JandlKind::Twisted }
    }
}

/// `ρ` on an oriented surface whose total is `θ`, spread evenly.
fn spread(base: &SimplicialSurface, theta: f64) -> Result<Vec<f64>> {
    let o = base.orientation().ok_or(GerbeError::NotOriented)?;
    let n = base.n_triangles() as f64;
    Ok(o.iter().map(|&s| s as f64 * theta / n).collect())
}

/// `I_ρ`, or a random gauge of it with its trivialization when `n > 1`.
fn gauge(base: Arc<SimplicialSurface>, rho: &[f64], n: usize, rng: &mut ChaCha8Rng) -> (Arc<BundleGerbe>, Option<Arc<OneMorphism>>) {
    if n <= 1 {
        return (Arc::new(BundleGerbe::trivial(base, rho)), None);
    }
    let tg = random_trivialized(base, n, rho, rng);
    (tg.gerbe, Some(tg.iso))
}

fn closed(base: SimplicialSurface, p: &ExampleParams) -> Result<Scenario> {
    let base = Arc::new(base);
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rho = spread(&base, p.theta)?;
    let (g, _) = gauge(base.clone(), &rho, p.indices, &mut rng);
    let mut w = Writer::new();
    w.surface(&base, "M");
    let id = w.gerbe(&g, "G");
    w.doc.holonomy = Some(HolonomyDoc { gerbe: id, mode: Some(Mode::Closed), worldsheet: None, base: None, domain_seed: 0 });
    Ok(w.doc)
}

/// A module `E: G|_Q → I` on a one-index source cover with the given
/// transports on the edges of `Q` and identity `α`.
pub fn brane_module(source: &Arc<BundleGerbe>, q: &Arc<SimplicialSurface>, u: &[CMat]) -> Result<Arc<OneMorphism>> {
    if source.cover().len() != 1 || u.len() != q.n_edges() {
        return Err(GerbeError::Scenario("brane module needs a one-index source and one matrix per edge".into()));
    }
    let n = u[0].nrows();
    let tgt = Arc::new(BundleGerbe::trivial(q.clone(), &vec![0.0; q.n_triangles()]));
    let z = source.cover().clone();
    let transport = vec![u.iter().map(|m| Some(m.clone())).collect()];
    let bundle = DiscreteBundle::from_parts(z.clone(), n, transport, vec![vec![None; q.n_triangles()]]);
    let alpha = (0..q.n_vertices()).map(|v| ((v, 0, 0), identity(n))).collect();
    let a = Atomic { source: source.clone(), target: tgt, z, s: vec![0], t: vec![0], bundle, alpha };
    Ok(Arc::new(OneMorphism::atomic(a.with_forced_curvature())))
}

fn disc_brane(p: &ExampleParams) -> Result<Scenario> {
    let disc = Arc::new(square_disc());
    let (q, j) = boundary_complex(&disc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let rho = random_rho(&disc, &mut rng);
    let i_rho = Arc::new(BundleGerbe::trivial(disc.clone(), &rho));
    let mut u = vec![identity(p.rank); q.n_edges()];
    u[0] = CMat::from_fn(p.rank, p.rank, |a, b| match (a == b, a % 2) {
        (false, _) => C64::new(0.0, 0.0),
        (true, 0) => cis(p.theta),
        (true, _) => cis(-p.theta),
    });
    let e0 = brane_module(&Arc::new(i_rho.pullback(&j)?), &q, &u)?;
    let (g, module) = if p.indices <= 1 {
        (i_rho, e0)
    } else {
        let tg = random_trivialized(disc.clone(), p.indices, &rho, &mut rng);
        let e0 = brane_module(&Arc::new(tg.trivial.pullback(&j)?), &q, &u)?;
        (tg.gerbe, Arc::new(compose_1(&e0, &pullback_1(&tg.iso, &j)?)?))
    };
    let brane = DBrane::new(&g, j, module)?;
    let mut w = Writer::new();
    w.surface(&disc, "M");
    w.surface(&q, "brane");
    let id = w.gerbe(&g, "G");
    w.brane(&g, &brane);
    w.doc.holonomy = Some(HolonomyDoc { gerbe: id, mode: Some(Mode::Dbrane), worldsheet: None, base: None, domain_seed: 0 });
    Ok(w.doc)
}

/// A Jandl structure on the orientation cover of `base`.
pub struct JandlSetup {
    pub oc: OrientationCover,
    pub gerbe: Arc<BundleGerbe>,
    pub j: JandlStructure,
    /// `I_ρ` and its product structure, with `B: G → I_ρ` when `G` is a gauge.
    pub trivial: Arc<BundleGerbe>,
    pub j0: JandlStructure,
    pub iso: Option<Arc<OneMorphism>>,
}

/// `I_ρ` on `Σ̂` with `ρ = −θ_N + η` for a random line `N` and a σ-invariant
/// `η` (both zero when `flat`), the product structure of `N` with sign
/// `eps`, and for `n > 1` its transport to a random gauge gerbe.
pub fn jandl_setup(base: SimplicialSurface, n: usize, eps: f64, flat: bool, rng: &mut ChaCha8Rng) -> Result<JandlSetup> {
    let oc = orientation_cover(Arc::new(base))?;
    let cov = oc.cover.clone();
    let (phase, rho) = if flat {
        (vec![C64::new(1.0, 0.0); cov.n_edges()], vec![0.0; cov.n_triangles()])
    } else {
        let tw = random_twist(&cov, rng);
        let eta: Vec<f64> = (0..oc.base.n_triangles()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = (0..cov.n_triangles()).map(|t| -tw.theta[t] + eta[oc.tri_base[t]]).collect();
        (tw.phase, rho)
    };
    let trivial = Arc::new(BundleGerbe::trivial(cov.clone(), &rho));
    let j0 = product_jandl(&trivial, &oc.sigma, &phase, C64::new(eps, 0.0))?;
    if n <= 1 {
        return Ok(JandlSetup { oc, gerbe: trivial.clone(), j: j0.clone(), trivial, j0, iso: None });
    }
    let tg = random_trivialized(cov, n, &rho, rng);
    let j0 = JandlStructure { k: j0.k, a: j0.a, phi: j0.phi };
    let j = jandl_transport(&tg.iso, &j0)?;
    Ok(JandlSetup { oc, gerbe: tg.gerbe, j, trivial: tg.trivial, j0, iso: Some(tg.iso) })
}

fn unoriented(base: SimplicialSurface, flat: bool, p: &ExampleParams) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let eps = match p.jandl {
        JandlKind::Trivial => 1.0,
        JandlKind::Twisted => -1.0,
    };
    let s = jandl_setup(base, p.indices, eps, flat, &mut rng)?;
    let mut w = Writer::new();
    let base_id = w.surface(&s.oc.base, "base");
    w.surface(&s.oc.cover, "cover");
    let id = w.gerbe(&s.gerbe, "G");
    w.jandl(&s.gerbe, &s.j);
    w.doc.holonomy =
        Some(HolonomyDoc { gerbe: id, mode: Some(Mode::Unoriented), worldsheet: None, base: Some(base_id), domain_seed: 0 });
    Ok(w.doc)
}

pub fn example(name: Example, p: &ExampleParams) -> Result<Scenario> {
    match name {
        Example::Sphere => closed(octahedron(), p),
        Example::Torus => closed(torus7(), p),
        Example::RandomGauge => {
            let mut p = p.clone();
            if p.indices <= 1 {
                p.indices = 3;
            }
            closed(torus7(), &p)
        }
        Example::DiscBrane => disc_brane(p),
        Example::Rp2 => unoriented(rp2(), true, p),
        Example::Klein => unoriented(klein_bottle(3, 3)?, false, p),
    }
}
