//! Bundle gerbes `(π, L, C, μ)` over a finite cover. The line bundle `L`
//! lives on ordered pairs of indices; its fibres are trivialized, so its
//! transports and `μ` are unit complex numbers.

use crate::bundle::{neg, signed};
use crate::error::{GerbeError, Result};
use crate::linalg::{cis, tolerance, C64};
use crate::report::Report;
use crate::site::{fiber_product, Cover};
use crate::surface::{EdgeImage, SimplicialMap, SimplicialSurface, Step, TriangleImage};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub struct BundleGerbe {
    cover: Arc<Cover>,
    /// `C_i(t)`, keyed `(i, t)`.
    c: BTreeMap<(usize, usize), f64>,
    /// Transport of `L_{ij}` along edge `e`, keyed `(i, j, e)`.
    u: BTreeMap<(usize, usize, usize), C64>,
    /// Trace curvature of `L_{ij}` on `t`, keyed `(i, j, t)`.
    l_curv: BTreeMap<(usize, usize, usize), f64>,
    /// `μ_{ijk}(v)`, keyed `(v, i, j, k)`.
    mu: BTreeMap<(usize, usize, usize, usize), C64>,
}

pub type CMap = BTreeMap<(usize, usize), f64>;
pub type UMap = BTreeMap<(usize, usize, usize), C64>;
pub type MuMap = BTreeMap<(usize, usize, usize, usize), C64>;

impl BundleGerbe {
    /// Builds a gerbe whose `L`-curvature is set to `C_j − C_i`.
    pub fn from_parts(cover: Arc<Cover>, c: CMap, u: UMap, mu: MuMap) -> Self {
        let base = cover.base().clone();
        let mut l_curv = BTreeMap::new();
        for t in 0..base.n_triangles() {
            for &i in cover.at_triangle(t) {
                for &j in cover.at_triangle(t) {
                    if let (Some(ci), Some(cj)) = (c.get(&(i, t)), c.get(&(j, t))) {
                        l_curv.insert((i, j, t), cj - ci);
                    }
                }
            }
        }
        BundleGerbe { cover, c, u, l_curv, mu }
    }

    /// Builds from raw data without deriving anything.
    pub fn from_raw(
        cover: Arc<Cover>,
        c: CMap,
        u: UMap,
        l_curv: BTreeMap<(usize, usize, usize), f64>,
        mu: MuMap,
    ) -> Self {
        BundleGerbe { cover, c, u, l_curv, mu }
    }

    /// `I_ρ`: one index, trivial `L`, trivial `μ`, `C = ρ`.
    pub fn trivial(base: Arc<SimplicialSurface>, rho: &[f64]) -> Self {
        assert_eq!(rho.len(), base.n_triangles());
        let cover = Arc::new(Cover::trivial(base.clone()));
        let one = C64::new(1.0, 0.0);
        let c = (0..base.n_triangles()).map(|t| ((0, t), rho[t])).collect();
        let u = (0..base.n_edges()).map(|e| ((0, 0, e), one)).collect();
        let mu = (0..base.n_vertices()).map(|v| ((v, 0, 0, 0), one)).collect();
        Self::from_parts(cover, c, u, mu)
    }

    pub fn cover(&self) -> &Arc<Cover> {
        &self.cover
    }
    pub fn base(&self) -> &Arc<SimplicialSurface> {
        self.cover.base()
    }
    pub fn c(&self, i: usize, t: usize) -> f64 {
        self.c[&(i, t)]
    }
    pub fn u(&self, i: usize, j: usize, e: usize) -> C64 {
        self.u[&(i, j, e)]
    }
    pub fn u_step(&self, i: usize, j: usize, st: Step) -> C64 {
        let x = self.u(i, j, st.edge);
        if st.forward {
            x
        } else {
            x.conj()
        }
    }
    pub fn l_curv(&self, i: usize, j: usize, t: usize) -> f64 {
        self.l_curv[&(i, j, t)]
    }
    pub fn mu(&self, v: usize, i: usize, j: usize, k: usize) -> C64 {
        self.mu[&(v, i, j, k)]
    }
    pub fn c_map(&self) -> &CMap {
        &self.c
    }
    pub fn u_map(&self) -> &UMap {
        &self.u
    }
    pub fn l_curv_map(&self) -> &BTreeMap<(usize, usize, usize), f64> {
        &self.l_curv
    }
    pub fn mu_map(&self) -> &MuMap {
        &self.mu
    }

    /// The canonical trivialization `t_μ(v, i)` of `Δ*L`, read off `μ_{iii}`.
    pub fn t_mu(&self, v: usize, i: usize) -> C64 {
        self.mu(v, i, i, i)
    }

    /// `ρ` if this is literally a trivial gerbe `I_ρ`.
    pub fn trivial_rho(&self) -> Option<Vec<f64>> {
        let base = self.base();
        let one = C64::new(1.0, 0.0);
        if self.cover.len() != 1 || !self.cover.support(0).vertices.iter().all(|&b| b) {
            return None;
        }
        if (0..base.n_edges()).any(|e| self.u.get(&(0, 0, e)) != Some(&one))
            || (0..base.n_vertices()).any(|v| self.mu.get(&(v, 0, 0, 0)) != Some(&one))
        {
            return None;
        }
        (0..base.n_triangles()).map(|t| self.c.get(&(0, t)).copied()).collect()
    }

    pub fn require_trivial(&self) -> Result<Vec<f64>> {
        self.trivial_rho().ok_or(GerbeError::NotTrivialGerbe)
    }

    /// Checks (G1), (G2), unitarity, curvature of `L` and μ-compatibility.
    pub fn validate(&self) -> Report {
        let eps = tolerance();
        let cov = &self.cover;
        let base = cov.base();
        let mut r = Report::new();
        for t in 0..base.n_triangles() {
            for &i in cov.at_triangle(t) {
                r.require("data present", self.c.contains_key(&(i, t)), || format!("C at triangle {t}"));
            }
        }
        if !r.is_ok() {
            return r;
        }
        for e in 0..base.n_edges() {
            for &i in cov.at_edge(e) {
                for &j in cov.at_edge(e) {
                    match self.u.get(&(i, j, e)) {
                        Some(x) => r.record("L unitary", (x.norm() - 1.0).abs(), eps, || format!("edge {e} pair ({i},{j})")),
                        None => r.require("data present", false, || format!("L at edge {e} pair ({i},{j})")),
                    }
                }
            }
        }
        for v in 0..base.n_vertices() {
            for &i in cov.at_vertex(v) {
                for &j in cov.at_vertex(v) {
                    for &k in cov.at_vertex(v) {
                        match self.mu.get(&(v, i, j, k)) {
                            Some(x) => r.record("mu unitary", (x.norm() - 1.0).abs(), eps, || format!("vertex {v}")),
                            None => r.require("data present", false, || format!("mu at vertex {v} ({i},{j},{k})")),
                        }
                    }
                }
            }
        }
        if !r.is_ok() {
            return r;
        }
        for t in 0..base.n_triangles() {
            for &i in cov.at_triangle(t) {
                for &j in cov.at_triangle(t) {
                    let g1 = match self.l_curv.get(&(i, j, t)) {
                        Some(&x) => x == self.c(j, t) - self.c(i, t),
                        None => false,
                    };
                    r.require("G1", g1, || format!("triangle {t} pair ({},{})", cov.label_string(i), cov.label_string(j)));
                    if let Some(&x) = self.l_curv.get(&(i, j, t)) {
                        let mut h = C64::new(1.0, 0.0);
                        for (e, s) in base.triangle_edges(t) {
                            h *= if s > 0 { self.u(i, j, e) } else { self.u(i, j, e).conj() };
                        }
                        r.record("L curvature", (h - cis(x)).norm(), eps, || format!("triangle {t} pair ({i},{j})"));
                    }
                }
            }
        }
        for e in 0..base.n_edges() {
            let [v0, v1] = base.edge(e);
            let ks = cov.at_edge(e);
            for &i in ks {
                for &j in ks {
                    for &k in ks {
                        let lhs = self.mu(v1, i, j, k) * self.u(i, j, e) * self.u(j, k, e);
                        let rhs = self.u(i, k, e) * self.mu(v0, i, j, k);
                        r.record("mu parallel", (lhs - rhs).norm(), eps, || format!("edge {e} triple ({i},{j},{k})"));
                    }
                }
            }
        }
        for v in 0..base.n_vertices() {
            let ks = cov.at_vertex(v);
            for &i in ks {
                for &j in ks {
                    for &k in ks {
                        for &l in ks {
                            let lhs = self.mu(v, i, k, l) * self.mu(v, i, j, k);
                            let rhs = self.mu(v, i, j, l) * self.mu(v, j, k, l);
                            r.record("G2", (lhs - rhs).norm(), eps, || format!("vertex {v} ({i},{j},{k},{l})"));
                        }
                    }
                }
            }
        }
        r
    }

    pub fn check(&self) -> Result<()> {
        let r = self.validate();
        match r.failed_laws().first() {
            None => Ok(()),
            Some(law) => Err(GerbeError::InvalidGerbe(format!("{law}: {:?}", r.laws[*law].locations))),
        }
    }

    /// Checks the two identities `μ_{iij} = t_μ(i)` and `μ_{ijj} = t_μ(j)`.
    pub fn validate_t_mu(&self) -> Report {
        let eps = tolerance();
        let mut r = Report::new();
        let base = self.base();
        for v in 0..base.n_vertices() {
            for &i in self.cover.at_vertex(v) {
                for &j in self.cover.at_vertex(v) {
                    r.record("t_mu left", (self.mu(v, i, i, j) - self.t_mu(v, i)).norm(), eps, || format!("vertex {v}"));
                    r.record("t_mu right", (self.mu(v, i, j, j) - self.t_mu(v, j)).norm(), eps, || format!("vertex {v}"));
                }
            }
        }
        r
    }

    /// `G ⊗ H` on the fibre product of covers.
    pub fn tensor(&self, other: &BundleGerbe) -> Result<BundleGerbe> {
        if **self.base() != **other.base() {
            return Err(GerbeError::BaseMismatch);
        }
        let (cover, legs) = fiber_product(&[&self.cover, &other.cover])?;
        let cover = Arc::new(cover);
        let (a, b) = (&legs[0], &legs[1]);
        let base = cover.base().clone();
        let mut c = BTreeMap::new();
        let mut u = BTreeMap::new();
        let mut mu = BTreeMap::new();
        for t in 0..base.n_triangles() {
            for &p in cover.at_triangle(t) {
                c.insert((p, t), self.c(a[p], t) + other.c(b[p], t));
            }
        }
        for e in 0..base.n_edges() {
            for &p in cover.at_edge(e) {
                for &q in cover.at_edge(e) {
                    u.insert((p, q, e), self.u(a[p], a[q], e) * other.u(b[p], b[q], e));
                }
            }
        }
        for v in 0..base.n_vertices() {
            let ks = cover.at_vertex(v);
            for &p in ks {
                for &q in ks {
                    for &s in ks {
                        mu.insert((v, p, q, s), self.mu(v, a[p], a[q], a[s]) * other.mu(v, b[p], b[q], b[s]));
                    }
                }
            }
        }
        Ok(Self::from_parts(cover, c, u, mu))
    }

    /// `G*`: same cover, `C ↦ −C`, conjugate `L` and `μ`.
    pub fn dual(&self) -> BundleGerbe {
        BundleGerbe {
            cover: self.cover.clone(),
            c: self.c.iter().map(|(k, x)| (*k, neg(*x))).collect(),
            u: self.u.iter().map(|(k, x)| (*k, x.conj())).collect(),
            l_curv: self.l_curv.iter().map(|(k, x)| (*k, neg(*x))).collect(),
            mu: self.mu.iter().map(|(k, x)| (*k, x.conj())).collect(),
        }
    }

    /// `f*G` with the same index labels.
    pub fn pullback(&self, f: &SimplicialMap) -> Result<BundleGerbe> {
        let cover = Arc::new(self.cover.pullback(f)?);
        let src = cover.base().clone();
        let one = C64::new(1.0, 0.0);
        let mut c = BTreeMap::new();
        let mut u = BTreeMap::new();
        let mut mu = BTreeMap::new();
        for t in 0..src.n_triangles() {
            for &i in cover.at_triangle(t) {
                let x = match f.triangle(t) {
                    TriangleImage::Triangle { tri, sign } => signed(sign, self.c(i, tri)),
                    TriangleImage::Degenerate => 0.0,
                };
                c.insert((i, t), x);
            }
        }
        for e in 0..src.n_edges() {
            for &i in cover.at_edge(e) {
                for &j in cover.at_edge(e) {
                    let x = match f.edge(e) {
                        EdgeImage::Edge { edge, sign } => {
                            let x = self.u(i, j, edge);
                            if sign > 0 {
                                x
                            } else {
                                x.conj()
                            }
                        }
                        EdgeImage::Vertex(_) => one,
                    };
                    u.insert((i, j, e), x);
                }
            }
        }
        for x in 0..src.n_vertices() {
            let ks = cover.at_vertex(x);
            for &i in ks {
                for &j in ks {
                    for &k in ks {
                        mu.insert((x, i, j, k), self.mu(f.vertex(x), i, j, k));
                    }
                }
            }
        }
        let mut g = Self::from_parts(cover, c, u, mu);
        // L-curvature pulled back directly; equal to C_j − C_i bit for bit
        for ((i, j, t), x) in g.l_curv.iter_mut() {
            *x = match f.triangle(*t) {
                TriangleImage::Triangle { tri, sign } => signed(sign, self.l_curv(*i, *j, tri)),
                TriangleImage::Degenerate => 0.0,
            };
        }
        Ok(g)
    }

    /// Pulls all data back to a finer cover along an index map `new → old`.
    pub fn refine(&self, new_cover: Arc<Cover>, map: &[usize]) -> Result<BundleGerbe> {
        if **new_cover.base() != **self.base() || map.len() != new_cover.len() {
            return Err(GerbeError::SiteMismatch);
        }
        for (k, &i) in map.iter().enumerate() {
            if !new_cover.support(k).is_subset(self.cover.support(i)) {
                return Err(GerbeError::SiteMismatch);
            }
        }
        let base = self.base().clone();
        let mut c = BTreeMap::new();
        let mut u = BTreeMap::new();
        let mut mu = BTreeMap::new();
        for t in 0..base.n_triangles() {
            for &k in new_cover.at_triangle(t) {
                c.insert((k, t), self.c(map[k], t));
            }
        }
        for e in 0..base.n_edges() {
            for &k in new_cover.at_edge(e) {
                for &l in new_cover.at_edge(e) {
                    u.insert((k, l, e), self.u(map[k], map[l], e));
                }
            }
        }
        for v in 0..base.n_vertices() {
            let ks = new_cover.at_vertex(v);
            for &a in ks {
                for &b in ks {
                    for &d in ks {
                        mu.insert((v, a, b, d), self.mu(v, map[a], map[b], map[d]));
                    }
                }
            }
        }
        Ok(Self::from_parts(new_cover, c, u, mu))
    }

    /// Overrides one `C` value (fault injection and scenario editing).
    pub fn with_c(mut self, i: usize, t: usize, x: f64) -> Self {
        self.c.insert((i, t), x);
        self
    }

    /// Overrides one `μ` value.
    pub fn with_mu(mut self, v: usize, i: usize, j: usize, k: usize, x: C64) -> Self {
        self.mu.insert((v, i, j, k), x);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_gerbe, random_rho};
    use crate::surface::builders::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn trivial_gerbe_is_valid_with_trivial_t_mu() {
        let base = Arc::new(torus7());
        let g = BundleGerbe::trivial(base.clone(), &vec![0.3; 14]);
        assert!(g.validate().is_ok());
        for v in 0..7 {
            assert_eq!(g.t_mu(v, 0), C64::new(1.0, 0.0));
        }
        assert_eq!(g.trivial_rho().unwrap(), vec![0.3; 14]);
    }

    #[test]
    fn unit_and_additivity_of_trivial_gerbes() {
        let base = Arc::new(torus7());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r1 = random_rho(&base, &mut rng);
        let r2 = random_rho(&base, &mut rng);
        let i0 = BundleGerbe::trivial(base.clone(), &vec![0.0; 14]);
        let (g, _) = random_gerbe(base.clone(), 3, &r1, &mut rng);
        assert_eq!(i0.tensor(&g).unwrap(), g);
        let sum: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| a + b).collect();
        let lhs = BundleGerbe::trivial(base.clone(), &r1).tensor(&BundleGerbe::trivial(base.clone(), &r2)).unwrap();
        assert_eq!(lhs, BundleGerbe::trivial(base, &sum));
    }

    #[test]
    fn random_gerbes_validate_and_satisfy_t_mu_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for s in [torus7(), rp2(), square_disc(), klein_bottle(3, 3).unwrap()] {
            let base = Arc::new(s);
            for n in 1..=4 {
                let rho = random_rho(&base, &mut rng);
                let (g, _) = random_gerbe(base.clone(), n, &rho, &mut rng);
                let r = g.validate();
                assert!(r.is_ok(), "{:?}", r.failed_laws());
                assert!(g.validate_t_mu().is_ok());
            }
        }
    }

    #[test]
    fn t_mu_matches_mu_iii_pattern() {
        let base = Arc::new(square_disc());
        let theta = 0.77;
        let g = BundleGerbe::trivial(base, &[0.0, 0.0]);
        let g = (0..4).fold(g, |g, v| g.with_mu(v, 0, 0, 0, cis(theta)));
        for v in 0..4 {
            assert!((g.t_mu(v, 0) - cis(theta)).norm() < 1e-15);
        }
        // solving μ_{iij} = t(i) for t at the single index reproduces e^{iθ}
        assert!(g.validate_t_mu().is_ok());
    }

    #[test]
    fn fault_injection_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = Arc::new(torus7());
        let rho = random_rho(&base, &mut rng);
        let (g, _) = random_gerbe(base.clone(), 3, &rho, &mut rng);
        let (&(v, i, j, k), &m) = g.mu_map().iter().find(|((_, i, j, k), _)| i != j || j != k).unwrap();
        let bad = g.clone().with_mu(v, i, j, k, m * cis(0.1));
        let r = bad.validate();
        assert!(!r.law("G2").unwrap().passed() || !r.law("mu parallel").unwrap().passed());
        let (&(i, t), &c) = g
            .c_map()
            .iter()
            .find(|((_, t), c)| c.abs() > 1e-3 && g.cover().at_triangle(*t).len() > 1)
            .unwrap();
        let r = g.clone().with_c(i, t, -c).validate();
        assert!(!r.law("G1").unwrap().passed());
        assert!(r.law("G1").unwrap().locations.iter().all(|l| l.starts_with(&format!("triangle {t} "))));
    }

    #[test]
    fn dual_is_exact_involution_and_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let base = Arc::new(torus7());
        let rho = random_rho(&base, &mut rng);
        let (g, _) = random_gerbe(base.clone(), 3, &rho, &mut rng);
        assert!(g.dual().validate().is_ok());
        assert_eq!(g.dual().dual(), g);
        let neg_rho: Vec<f64> = rho.iter().map(|x| -x).collect();
        assert_eq!(BundleGerbe::trivial(base.clone(), &rho).dual(), BundleGerbe::trivial(base, &neg_rho));
    }

    #[test]
    fn pullback_functoriality_and_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = Arc::new(torus7());
        let rho = random_rho(&base, &mut rng);
        let (g, _) = random_gerbe(base.clone(), 3, &rho, &mut rng);
        let id = SimplicialMap::identity(base.clone());
        assert_eq!(g.pullback(&id).unwrap(), g);
        let f = SimplicialMap::new(base.clone(), base.clone(), (0..7).map(|i| (7 - i) % 7).collect()).unwrap();
        let h = SimplicialMap::new(base.clone(), base.clone(), (0..7).map(|i| (i + 3) % 7).collect()).unwrap();
        let lhs = g.pullback(&f).unwrap().pullback(&h).unwrap();
        let rhs = g.pullback(&h.then(&f).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert!(lhs.validate().is_ok());
        let pulled_rho: Vec<f64> = (0..14)
            .map(|t| match f.triangle(t) {
                TriangleImage::Triangle { tri, sign } => signed(sign, rho[tri]),
                TriangleImage::Degenerate => 0.0,
            })
            .collect();
        assert_eq!(BundleGerbe::trivial(base.clone(), &rho).pullback(&f).unwrap(), BundleGerbe::trivial(base, &pulled_rho));
    }

    #[test]
    fn pullback_along_degenerate_map_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let base = Arc::new(torus7());
        let rho = random_rho(&base, &mut rng);
        let (g, _) = random_gerbe(base.clone(), 3, &rho, &mut rng);
        let f = SimplicialMap::new(base.clone(), base.clone(), vec![0, 1, 1, 0, 1, 1, 0]).unwrap();
        assert!(g.pullback(&f).unwrap().validate().is_ok());
    }

    #[test]
    fn tensor_of_random_gerbes_is_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let base = Arc::new(rp2());
        let (g, _) = random_gerbe(base.clone(), 2, &random_rho(&base, &mut rng), &mut rng);
        let (h, _) = random_gerbe(base.clone(), 3, &random_rho(&base, &mut rng), &mut rng);
        assert!(g.tensor(&h).unwrap().validate().is_ok());
    }
}
