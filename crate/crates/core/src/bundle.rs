//! Discrete hermitian vector bundles with connection: unitary edge transports
//! plus stored per-triangle trace curvature.

use crate::error::{GerbeError, Result};
use crate::linalg::{approx_eq, cis, det, identity, kron, max_dev, random_unitary, scalar, tolerance, unitarity_defect, CMat, C64};
use crate::site::{Cover, Simplex};
use crate::surface::{Cycle, EdgeImage, SimplicialMap, Step, TriangleImage};
use rand::Rng;
use std::sync::Arc;

/// Negation that never produces `-0.0`, so that double negation and
/// sign flips compare bytewise.
pub fn neg(x: f64) -> f64 {
    0.0 - x
}

pub fn signed(sign: i8, x: f64) -> f64 {
    if sign > 0 {
        x
    } else {
        neg(x)
    }
}

/// A rank-`n` bundle over a cover: transports along canonical edge
/// orientation and trace curvature per triangle, for every valid index.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBundle {
    cover: Arc<Cover>,
    rank: usize,
    transport: Vec<Vec<Option<CMat>>>,
    trace_curv: Vec<Vec<Option<f64>>>,
}

impl DiscreteBundle {
    pub fn new(
        cover: Arc<Cover>,
        rank: usize,
        transport: Vec<Vec<Option<CMat>>>,
        trace_curv: Vec<Vec<Option<f64>>>,
    ) -> Result<Self> {
        let b = Self::from_parts(cover, rank, transport, trace_curv);
        b.check()?;
        Ok(b)
    }

    /// Builds without validation.
    pub fn from_parts(
        cover: Arc<Cover>,
        rank: usize,
        transport: Vec<Vec<Option<CMat>>>,
        trace_curv: Vec<Vec<Option<f64>>>,
    ) -> Self {
        DiscreteBundle { cover, rank, transport, trace_curv }
    }

    /// Identity transports and zero curvature.
    pub fn trivial(cover: Arc<Cover>, rank: usize) -> Self {
        let base = cover.base().clone();
        let transport = (0..cover.len())
            .map(|i| {
                (0..base.n_edges())
                    .map(|e| cover.valid(i, Simplex::E(e)).then(|| identity(rank)))
                    .collect()
            })
            .collect();
        let trace_curv = (0..cover.len())
            .map(|i| (0..base.n_triangles()).map(|t| cover.valid(i, Simplex::T(t)).then_some(0.0)).collect())
            .collect();
        DiscreteBundle { cover, rank, transport, trace_curv }
    }

    /// Random unitary transports with curvature read off the determinants.
    pub fn random<R: Rng>(cover: Arc<Cover>, rank: usize, rng: &mut R) -> Self {
        let base = cover.base().clone();
        let transport: Vec<Vec<Option<CMat>>> = (0..cover.len())
            .map(|i| {
                (0..base.n_edges())
                    .map(|e| cover.valid(i, Simplex::E(e)).then(|| random_unitary(rng, rank)))
                    .collect()
            })
            .collect();
        let mut b = DiscreteBundle { cover: cover.clone(), rank, transport, trace_curv: Vec::new() };
        b.trace_curv = (0..cover.len())
            .map(|i| {
                (0..base.n_triangles())
                    .map(|t| cover.valid(i, Simplex::T(t)).then(|| det(&b.triangle_holonomy(i, t)).arg()))
                    .collect()
            })
            .collect();
        b
    }

    /// A line bundle on a one-index cover of the whole base with curvature
    /// exactly `theta`, with transports solved by real least squares. `None`
    /// when the total curvature on a closed oriented base is not in `2πℤ`.
    pub fn line_with_curvature(cover: Arc<Cover>, theta: &[f64]) -> Option<Self> {
        let base = cover.base().clone();
        assert_eq!(cover.len(), 1);
        let (nt, ne) = (base.n_triangles(), base.n_edges());
        let mut d = nalgebra::DMatrix::<f64>::zeros(nt, ne);
        for t in 0..nt {
            for (e, sg) in base.triangle_edges(t) {
                d[(t, e)] += sg as f64;
            }
        }
        let mut rhs = nalgebra::DVector::from_column_slice(theta);
        if base.is_closed() && nt > 0 {
            if let Some(o) = base.orientation() {
                let total: f64 = o.iter().zip(theta).map(|(&s, x)| s as f64 * x).sum();
                let k = (total / (2.0 * std::f64::consts::PI)).round();
                if (total - 2.0 * std::f64::consts::PI * k).abs() > crate::linalg::tolerance() {
                    return None;
                }
                rhs[0] -= 2.0 * std::f64::consts::PI * k * o[0] as f64;
            }
        }
        let x = if nt == 0 {
            nalgebra::DVector::zeros(ne)
        } else {
            d.clone().svd(true, true).solve(&rhs, 1e-12).ok()?
        };
        let residual = (&d * &x - &rhs).amax();
        if residual > crate::linalg::tolerance() {
            return None;
        }
        let transport = vec![(0..ne).map(|e| Some(scalar(cis(x[e])))).collect()];
        let trace_curv = vec![theta.iter().map(|&t| Some(t)).collect()];
        Some(DiscreteBundle { cover, rank: 1, transport, trace_curv })
    }

    pub fn cover(&self) -> &Arc<Cover> {
        &self.cover
    }
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn transport(&self, i: usize, e: usize) -> &CMat {
        self.transport[i][e]
            .as_ref()
            .unwrap_or_else(|| panic!("index {} not valid on edge {e}", self.cover.label_string(i)))
    }

    pub fn try_transport(&self, i: usize, e: usize) -> Result<&CMat> {
        self.transport[i][e].as_ref().ok_or(GerbeError::IndexNotValidOnEdge { index: i, edge: e })
    }

    pub fn trace_curv(&self, i: usize, t: usize) -> f64 {
        self.trace_curv[i][t].unwrap_or_else(|| panic!("index {i} not valid on triangle {t}"))
    }

    pub fn transports(&self) -> &[Vec<Option<CMat>>] {
        &self.transport
    }
    pub fn trace_curvatures(&self) -> &[Vec<Option<f64>>] {
        &self.trace_curv
    }

    /// Transport along an oriented edge.
    pub fn step_transport(&self, i: usize, st: Step) -> Result<CMat> {
        let u = self.try_transport(i, st.edge)?;
        Ok(if st.forward { u.clone() } else { u.adjoint() })
    }

    /// Path-ordered transport once around `t` in its cyclic order.
    pub fn triangle_holonomy(&self, i: usize, t: usize) -> CMat {
        let base = self.cover.base();
        let mut h = identity(self.rank);
        for (e, sign) in base.triangle_edges(t) {
            let u = self.transport(i, e);
            h = if sign > 0 { u * h } else { u.adjoint() * h };
        }
        h
    }

    /// Every violated invariant, with location.
    pub fn violations(&self) -> Vec<String> {
        let eps = tolerance();
        let base = self.cover.base();
        let mut out = Vec::new();
        if self.transport.len() != self.cover.len() || self.trace_curv.len() != self.cover.len() {
            out.push("index count mismatch".to_string());
            return out;
        }
        for i in 0..self.cover.len() {
            for e in 0..base.n_edges() {
                let valid = self.cover.valid(i, Simplex::E(e));
                match &self.transport[i][e] {
                    Some(u) if valid => {
                        if u.shape() != (self.rank, self.rank) {
                            out.push(format!("transport shape at index {} edge {e}", self.cover.label_string(i)));
                        } else if unitarity_defect(u) > eps {
                            out.push(format!("non-unitary transport at index {} edge {e}", self.cover.label_string(i)));
                        }
                    }
                    None if !valid => {}
                    _ => out.push(format!("transport presence at index {} edge {e}", self.cover.label_string(i))),
                }
            }
            for t in 0..base.n_triangles() {
                let valid = self.cover.valid(i, Simplex::T(t));
                match self.trace_curv[i][t] {
                    Some(tc) if valid => {
                        let d = det(&self.triangle_holonomy(i, t));
                        if (d - cis(tc)).norm() > eps * (1.0 + self.rank as f64) {
                            out.push(format!(
                                "determinant inconsistent with curvature at index {} triangle {t}",
                                self.cover.label_string(i)
                            ));
                        }
                    }
                    None if !valid => {}
                    _ => out.push(format!("curvature presence at index {} triangle {t}", self.cover.label_string(i))),
                }
            }
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            None => Ok(()),
            Some(v) => Err(GerbeError::InvalidGerbe(v)),
        }
    }

    fn same_site(&self, other: &DiscreteBundle) -> Result<()> {
        if Arc::ptr_eq(&self.cover, &other.cover) || *self.cover == *other.cover {
            Ok(())
        } else {
            Err(GerbeError::SiteMismatch)
        }
    }

    /// Kronecker tensor product; `tc = n₂·tc₁ + n₁·tc₂`.
    pub fn tensor(&self, other: &DiscreteBundle) -> Result<DiscreteBundle> {
        self.same_site(other)?;
        let (n1, n2) = (self.rank as f64, other.rank as f64);
        let transport = self
            .transport
            .iter()
            .zip(&other.transport)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.as_ref().zip(y.as_ref()).map(|(x, y)| kron(x, y))).collect())
            .collect();
        let trace_curv = self
            .trace_curv
            .iter()
            .zip(&other.trace_curv)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.zip(*y).map(|(x, y)| n2 * x + n1 * y)).collect())
            .collect();
        Ok(DiscreteBundle { cover: self.cover.clone(), rank: self.rank * other.rank, transport, trace_curv })
    }

    /// Conjugate transports and negated curvature.
    pub fn dual(&self) -> DiscreteBundle {
        let transport = self
            .transport
            .iter()
            .map(|r| r.iter().map(|u| u.as_ref().map(|u| u.map(|z| z.conj()))).collect())
            .collect();
        let trace_curv = self.trace_curv.iter().map(|r| r.iter().map(|x| x.map(neg)).collect()).collect();
        DiscreteBundle { cover: self.cover.clone(), rank: self.rank, transport, trace_curv }
    }

    /// Pullback along `f` onto the pulled-back cover (same indices).
    pub fn pullback(&self, f: &SimplicialMap, pulled: Arc<Cover>) -> Result<DiscreteBundle> {
        if *f.target != **self.cover.base() || pulled.labels() != self.cover.labels() || *f.source != **pulled.base() {
            return Err(GerbeError::BaseMismatch);
        }
        let src = pulled.base().clone();
        let mut transport = vec![vec![None; src.n_edges()]; pulled.len()];
        let mut trace_curv = vec![vec![None; src.n_triangles()]; pulled.len()];
        for i in 0..pulled.len() {
            for (e, slot) in transport[i].iter_mut().enumerate() {
                if !pulled.valid(i, Simplex::E(e)) {
                    continue;
                }
                *slot = Some(match f.edge(e) {
                    EdgeImage::Edge { edge, sign } => {
                        let u = self.transport(i, edge);
                        if sign > 0 {
                            u.clone()
                        } else {
                            u.adjoint()
                        }
                    }
                    EdgeImage::Vertex(_) => identity(self.rank),
                });
            }
            for (t, slot) in trace_curv[i].iter_mut().enumerate() {
                if !pulled.valid(i, Simplex::T(t)) {
                    continue;
                }
                *slot = Some(match f.triangle(t) {
                    TriangleImage::Triangle { tri, sign } => signed(sign, self.trace_curv(i, tri)),
                    TriangleImage::Degenerate => 0.0,
                });
            }
        }
        Ok(DiscreteBundle { cover: pulled, rank: self.rank, transport, trace_curv })
    }

    /// Pullback along an index map `K → I` of covers over the same base:
    /// index `k` of `new_cover` carries the data of `map[k]`.
    pub fn reindex(&self, new_cover: Arc<Cover>, map: &[usize]) -> DiscreteBundle {
        let base = new_cover.base().clone();
        let transport = (0..new_cover.len())
            .map(|k| {
                (0..base.n_edges())
                    .map(|e| new_cover.valid(k, Simplex::E(e)).then(|| self.transport(map[k], e).clone()))
                    .collect()
            })
            .collect();
        let trace_curv = (0..new_cover.len())
            .map(|k| {
                (0..base.n_triangles())
                    .map(|t| new_cover.valid(k, Simplex::T(t)).then(|| self.trace_curv(map[k], t)))
                    .collect()
            })
            .collect();
        DiscreteBundle { cover: new_cover, rank: self.rank, transport, trace_curv }
    }

    /// Path-ordered transport around a cycle using `indices[n]` on step `n`.
    /// `splice(v, from, to)` maps the fiber of `from` to that of `to` at `v`.
    pub fn cycle_transport(
        &self,
        cycle: &Cycle,
        indices: &[usize],
        splice: &dyn Fn(usize, usize, usize) -> CMat,
    ) -> Result<CMat> {
        let base = self.cover.base();
        let n = cycle.steps.len();
        assert_eq!(indices.len(), n);
        let mut h = identity(self.rank);
        for (pos, st) in cycle.steps.iter().enumerate() {
            let i = indices[pos];
            h = self.step_transport(i, *st)? * h;
            let next = indices[(pos + 1) % n];
            if next != i {
                h = splice(st.head(base), i, next) * h;
            }
        }
        Ok(h)
    }

    /// Trace of the cycle transport (basepoint independent).
    pub fn trace_holonomy(
        &self,
        cycle: &Cycle,
        indices: &[usize],
        splice: &dyn Fn(usize, usize, usize) -> CMat,
    ) -> Result<C64> {
        Ok(self.cycle_transport(cycle, indices, splice)?.trace())
    }

    /// Rank-1 cycle holonomy.
    pub fn cycle_holonomy(
        &self,
        cycle: &Cycle,
        indices: &[usize],
        splice: &dyn Fn(usize, usize, usize) -> CMat,
    ) -> Result<C64> {
        if self.rank != 1 {
            return Err(GerbeError::NotInvertible(self.rank));
        }
        self.trace_holonomy(cycle, indices, splice)
    }

    /// Largest deviation between two bundles on the same site.
    pub fn max_deviation(&self, other: &DiscreteBundle) -> f64 {
        if self.rank != other.rank || self.cover.len() != other.cover.len() {
            return f64::INFINITY;
        }
        let mut m: f64 = 0.0;
        for (a, b) in self.transport.iter().zip(&other.transport) {
            for (x, y) in a.iter().zip(b) {
                match (x, y) {
                    (Some(x), Some(y)) => m = m.max(max_dev(x, y)),
                    (None, None) => {}
                    _ => return f64::INFINITY,
                }
            }
        }
        for (a, b) in self.trace_curv.iter().zip(&other.trace_curv) {
            for (x, y) in a.iter().zip(b) {
                match (x, y) {
                    (Some(x), Some(y)) => m = m.max((x - y).abs()),
                    (None, None) => {}
                    _ => return f64::INFINITY,
                }
            }
        }
        m
    }
}

/// A connection-preserving isometry between bundles on the same site,
/// stored per (index, vertex).
#[derive(Debug, Clone, PartialEq)]
pub struct BundleMorphism {
    pub matrices: Vec<Vec<Option<CMat>>>,
}

impl BundleMorphism {
    pub fn identity(b: &DiscreteBundle) -> Self {
        let c = b.cover();
        let nv = c.base().n_vertices();
        BundleMorphism {
            matrices: (0..c.len())
                .map(|i| (0..nv).map(|v| c.valid(i, Simplex::V(v)).then(|| identity(b.rank()))).collect())
                .collect(),
        }
    }

    pub fn at(&self, i: usize, v: usize) -> &CMat {
        self.matrices[i][v].as_ref().expect("morphism defined on valid vertices")
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &BundleMorphism) -> BundleMorphism {
        BundleMorphism {
            matrices: self
                .matrices
                .iter()
                .zip(&other.matrices)
                .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.as_ref().zip(y.as_ref()).map(|(x, y)| y * x)).collect())
                .collect(),
        }
    }

    /// Checks isometry and intertwining of transports.
    pub fn check(&self, src: &DiscreteBundle, tgt: &DiscreteBundle) -> Result<()> {
        let eps = tolerance();
        let c = src.cover();
        let base = c.base();
        for i in 0..c.len() {
            for v in 0..base.n_vertices() {
                if let Some(m) = &self.matrices[i][v] {
                    if m.shape() != (tgt.rank(), src.rank()) || crate::linalg::isometry_defect(m) > eps {
                        return Err(GerbeError::MorphismMismatch(format!("not an isometry at vertex {v}")));
                    }
                }
            }
            for e in 0..base.n_edges() {
                if !c.valid(i, Simplex::E(e)) {
                    continue;
                }
                let [v0, v1] = base.edge(e);
                let lhs = self.at(i, v1) * src.transport(i, e);
                let rhs = tgt.transport(i, e) * self.at(i, v0);
                if !approx_eq(&lhs, &rhs, eps) {
                    return Err(GerbeError::MorphismMismatch(format!("not parallel along edge {e}")));
                }
            }
        }
        Ok(())
    }

    pub fn max_deviation(&self, other: &BundleMorphism) -> f64 {
        let mut m: f64 = 0.0;
        for (a, b) in self.matrices.iter().zip(&other.matrices) {
            for (x, y) in a.iter().zip(b) {
                match (x, y) {
                    (Some(x), Some(y)) => m = m.max(max_dev(x, y)),
                    (None, None) => {}
                    _ => return f64::INFINITY,
                }
            }
        }
        m
    }
}
