//! Finite covers of a surface, their fibre products, refinements and descent.

use crate::bundle::DiscreteBundle;
use crate::error::{GerbeError, Result};
use crate::linalg::{approx_eq, identity, tolerance, CMat};
use crate::surface::{EdgeImage, SimplicialMap, SimplicialSurface, TriangleImage};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Index label. Fibre products concatenate labels, which keeps them flat.
pub type Label = Vec<String>;

/// A simplex of the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Simplex {
    V(usize),
    E(usize),
    T(usize),
}

/// A downward-closed set of simplices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
    pub triangles: Vec<bool>,
}

impl Support {
    pub fn empty(base: &SimplicialSurface) -> Self {
        Support {
            vertices: vec![false; base.n_vertices()],
            edges: vec![false; base.n_edges()],
            triangles: vec![false; base.n_triangles()],
        }
    }

    pub fn full(base: &SimplicialSurface) -> Self {
        Support {
            vertices: vec![true; base.n_vertices()],
            edges: vec![true; base.n_edges()],
            triangles: vec![true; base.n_triangles()],
        }
    }

    /// Smallest downward-closed set containing the given simplices.
    pub fn closure(base: &SimplicialSurface, simplices: &[Simplex]) -> Self {
        let mut s = Self::empty(base);
        for &x in simplices {
            s.insert_closed(base, x);
        }
        s
    }

    pub fn insert_closed(&mut self, base: &SimplicialSurface, x: Simplex) {
        match x {
            Simplex::V(v) => self.vertices[v] = true,
            Simplex::E(e) => {
                self.edges[e] = true;
                for v in base.edge(e) {
                    self.vertices[v] = true;
                }
            }
            Simplex::T(t) => {
                self.triangles[t] = true;
                for (e, _) in base.triangle_edges(t) {
                    self.insert_closed(base, Simplex::E(e));
                }
            }
        }
    }

    /// Simplices of the support that are not faces of another one in it.
    pub fn maximal(&self, base: &SimplicialSurface) -> Vec<Simplex> {
        let mut covered = Support::empty(base);
        for t in (0..base.n_triangles()).filter(|&t| self.triangles[t]) {
            covered.insert_closed(base, Simplex::T(t));
        }
        let mut out: Vec<Simplex> = (0..base.n_triangles()).filter(|&t| self.triangles[t]).map(Simplex::T).collect();
        let lone: Vec<usize> = (0..base.n_edges()).filter(|&e| self.edges[e] && !covered.edges[e]).collect();
        for e in lone {
            out.push(Simplex::E(e));
            covered.insert_closed(base, Simplex::E(e));
        }
        out.extend((0..base.n_vertices()).filter(|&v| self.vertices[v] && !covered.vertices[v]).map(Simplex::V));
        out
    }

    pub fn contains(&self, x: Simplex) -> bool {
        match x {
            Simplex::V(v) => self.vertices[v],
            Simplex::E(e) => self.edges[e],
            Simplex::T(t) => self.triangles[t],
        }
    }

    pub fn intersect(&self, other: &Support) -> Support {
        let and = |a: &[bool], b: &[bool]| a.iter().zip(b).map(|(x, y)| *x && *y).collect();
        Support {
            vertices: and(&self.vertices, &other.vertices),
            edges: and(&self.edges, &other.edges),
            triangles: and(&self.triangles, &other.triangles),
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.vertices.iter().any(|&b| b)
    }

    pub fn is_subset(&self, other: &Support) -> bool {
        let sub = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(x, y)| !*x || *y);
        sub(&self.vertices, &other.vertices)
            && sub(&self.edges, &other.edges)
            && sub(&self.triangles, &other.triangles)
    }

    fn is_downward_closed(&self, base: &SimplicialSurface) -> bool {
        (0..base.n_edges()).all(|e| !self.edges[e] || base.edge(e).iter().all(|&v| self.vertices[v]))
            && (0..base.n_triangles())
                .all(|t| !self.triangles[t] || base.triangle_edges(t).iter().all(|&(e, _)| self.edges[e]))
    }

    /// Preimage under a simplicial map into the support's base.
    pub fn preimage(&self, f: &SimplicialMap) -> Support {
        let src = &f.source;
        let vertices = (0..src.n_vertices()).map(|v| self.vertices[f.vertex(v)]).collect();
        let edges = (0..src.n_edges())
            .map(|e| match f.edge(e) {
                EdgeImage::Edge { edge, .. } => self.edges[edge],
                EdgeImage::Vertex(v) => self.vertices[v],
            })
            .collect();
        let triangles = (0..src.n_triangles())
            .map(|t| match f.triangle(t) {
                TriangleImage::Triangle { tri, .. } => self.triangles[tri],
                TriangleImage::Degenerate => {
                    // the image is the simplex spanned by the distinct image vertices
                    let [a, b, c] = src.triangle(t);
                    let mut img = vec![f.vertex(a), f.vertex(b), f.vertex(c)];
                    img.sort();
                    img.dedup();
                    match img[..] {
                        [v] => self.vertices[v],
                        [x, y] => f.target.find_edge(x, y).is_some_and(|(e, _)| self.edges[e]),
                        _ => false,
                    }
                }
            })
            .collect();
        Support { vertices, edges, triangles }
    }
}

/// A finite cover: labelled indices with supports, modelling `π: Y → M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    base: Arc<SimplicialSurface>,
    labels: Vec<Label>,
    supports: Vec<Support>,
    by_vertex: Vec<Vec<usize>>,
    by_edge: Vec<Vec<usize>>,
    by_tri: Vec<Vec<usize>>,
}

impl Cover {
    /// Checks downward closure, distinct labels and that every simplex is covered.
    pub fn new(base: Arc<SimplicialSurface>, labels: Vec<Label>, supports: Vec<Support>) -> Result<Self> {
        let c = Self::unchecked(base, labels, supports);
        c.check()?;
        Ok(c)
    }

    /// Builds without surjectivity checks. Used for pullbacks, which keep
    /// every index (possibly with empty support).
    pub fn unchecked(base: Arc<SimplicialSurface>, labels: Vec<Label>, supports: Vec<Support>) -> Self {
        assert_eq!(labels.len(), supports.len());
        let collect = |n: usize, pick: &dyn Fn(&Support, usize) -> bool| -> Vec<Vec<usize>> {
            (0..n).map(|x| (0..supports.len()).filter(|&i| pick(&supports[i], x)).collect()).collect()
        };
        let by_vertex = collect(base.n_vertices(), &|s, x| s.vertices[x]);
        let by_edge = collect(base.n_edges(), &|s, x| s.edges[x]);
        let by_tri = collect(base.n_triangles(), &|s, x| s.triangles[x]);
        Cover { base, labels, supports, by_vertex, by_edge, by_tri }
    }

    fn check(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for l in &self.labels {
            if !seen.insert(l) {
                return Err(GerbeError::MalformedSurface(format!("duplicate index label {l:?}")));
            }
        }
        for (i, s) in self.supports.iter().enumerate() {
            if !s.is_downward_closed(&self.base) {
                return Err(GerbeError::MalformedSurface(format!(
                    "support of index {} is not downward closed",
                    self.labels[i].join("/")
                )));
            }
        }
        let uncovered = |lists: &[Vec<usize>]| lists.iter().position(|l| l.is_empty());
        if let Some(v) = uncovered(&self.by_vertex) {
            return Err(GerbeError::EmptyRefinement(format!("vertex {} uncovered", self.base.name(v))));
        }
        if let Some(e) = uncovered(&self.by_edge) {
            return Err(GerbeError::EmptyRefinement(format!("edge {e} uncovered")));
        }
        if let Some(t) = uncovered(&self.by_tri) {
            return Err(GerbeError::EmptyRefinement(format!("triangle {t} uncovered")));
        }
        Ok(())
    }

    /// The one-index cover with full support. Its label is empty, so fibre
    /// products with it keep the other factor's labels.
    pub fn trivial(base: Arc<SimplicialSurface>) -> Self {
        let s = Support::full(&base);
        Self::unchecked(base, vec![Vec::new()], vec![s])
    }

    /// Cover whose index supports are the closures of given triangle sets.
    pub fn from_triangle_sets(base: Arc<SimplicialSurface>, sets: &[Vec<usize>]) -> Result<Self> {
        let supports = sets
            .iter()
            .map(|ts| Support::closure(&base, &ts.iter().map(|&t| Simplex::T(t)).collect::<Vec<_>>()))
            .collect();
        let labels = (0..sets.len()).map(|i| vec![format!("U{i}")]).collect();
        Self::new(base, labels, supports)
    }

    pub fn base(&self) -> &Arc<SimplicialSurface> {
        &self.base
    }
    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
    pub fn label(&self, i: usize) -> &Label {
        &self.labels[i]
    }
    pub fn label_string(&self, i: usize) -> String {
        self.labels[i].join("/")
    }
    pub fn find_label(&self, l: &[String]) -> Option<usize> {
        self.labels.iter().position(|x| x == l)
    }
    pub fn support(&self, i: usize) -> &Support {
        &self.supports[i]
    }
    pub fn supports(&self) -> &[Support] {
        &self.supports
    }
    pub fn valid(&self, i: usize, x: Simplex) -> bool {
        self.supports[i].contains(x)
    }
    pub fn at_vertex(&self, v: usize) -> &[usize] {
        &self.by_vertex[v]
    }
    pub fn at_edge(&self, e: usize) -> &[usize] {
        &self.by_edge[e]
    }
    pub fn at_triangle(&self, t: usize) -> &[usize] {
        &self.by_tri[t]
    }
    pub fn at(&self, x: Simplex) -> &[usize] {
        match x {
            Simplex::V(v) => &self.by_vertex[v],
            Simplex::E(e) => &self.by_edge[e],
            Simplex::T(t) => &self.by_tri[t],
        }
    }
    pub fn overlap(&self, i: usize, j: usize) -> bool {
        !self.supports[i].intersect(&self.supports[j]).is_empty()
    }

    /// Same labels, supports pulled back along `f`.
    pub fn pullback(&self, f: &SimplicialMap) -> Result<Cover> {
        if *f.target != *self.base {
            return Err(GerbeError::BaseMismatch);
        }
        let supports = self.supports.iter().map(|s| s.preimage(f)).collect();
        Ok(Cover::unchecked(f.source.clone(), self.labels.clone(), supports))
    }

    /// Every simplex of the base.
    pub fn simplices(&self) -> Vec<Simplex> {
        let b = &self.base;
        (0..b.n_vertices())
            .map(Simplex::V)
            .chain((0..b.n_edges()).map(Simplex::E))
            .chain((0..b.n_triangles()).map(Simplex::T))
            .collect()
    }
}

/// Pairs `(i, j)` with overlapping support satisfying `keep`, in
/// lexicographic order, with concatenated labels and intersected supports.
pub fn product_cover(
    c1: &Cover,
    c2: &Cover,
    keep: impl Fn(usize, usize) -> bool,
) -> Result<(Cover, Vec<(usize, usize)>)> {
    if *c1.base != *c2.base {
        return Err(GerbeError::BaseMismatch);
    }
    let mut labels = Vec::new();
    let mut supports = Vec::new();
    let mut pairs = Vec::new();
    let mut seen = vec![usize::MAX; c2.len()];
    let mut cand = Vec::new();
    for i in 0..c1.len() {
        cand.clear();
        for v in 0..c1.base.n_vertices() {
            if !c1.supports[i].vertices[v] {
                continue;
            }
            for &j in &c2.by_vertex[v] {
                if seen[j] != i {
                    seen[j] = i;
                    cand.push(j);
                }
            }
        }
        cand.sort_unstable();
        for &j in &cand {
            if !keep(i, j) {
                continue;
            }
            let s = c1.supports[i].intersect(&c2.supports[j]);
            if s.is_empty() {
                continue;
            }
            let mut l = c1.labels[i].clone();
            l.extend(c2.labels[j].iter().cloned());
            labels.push(l);
            supports.push(s);
            pairs.push((i, j));
        }
    }
    Ok((Cover::unchecked(c1.base.clone(), labels, supports), pairs))
}

/// Fibre product of covers with flattened tuple labels; returns the leg maps.
pub fn fiber_product(covers: &[&Cover]) -> Result<(Cover, Vec<Vec<usize>>)> {
    let (first, rest) = covers.split_first().ok_or_else(|| GerbeError::Scenario("no covers".into()))?;
    let mut acc = (*first).clone();
    let mut legs: Vec<Vec<usize>> = vec![(0..acc.len()).collect()];
    for c in rest {
        let (p, pairs) = product_cover(&acc, c, |_, _| true)?;
        legs = legs.iter().map(|leg| pairs.iter().map(|&(i, _)| leg[i]).collect()).collect();
        legs.push(pairs.iter().map(|&(_, j)| j).collect());
        acc = p;
    }
    Ok((acc, legs))
}

/// A cover `K` with maps into a list of leg covers, modelling `ζ: Z → Y₁ ×_M ⋯ ×_M Y_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub cover: Arc<Cover>,
    pub legs: Vec<Arc<Cover>>,
    pub maps: Vec<Vec<usize>>,
    /// When refining a fibre product over some `P` rather than over the base,
    /// the per-leg maps to `P`; only tuples with equal `P`-images must be hit.
    pub over: Option<Vec<Vec<usize>>>,
}

impl Refinement {
    pub fn new(cover: Arc<Cover>, legs: Vec<Arc<Cover>>, maps: Vec<Vec<usize>>) -> Result<Self> {
        let r = Refinement { cover, legs, maps, over: None };
        r.check()?;
        Ok(r)
    }

    pub fn unchecked(cover: Arc<Cover>, legs: Vec<Arc<Cover>>, maps: Vec<Vec<usize>>) -> Self {
        Refinement { cover, legs, maps, over: None }
    }

    /// Leg images of index `k`.
    pub fn image(&self, k: usize) -> Vec<usize> {
        self.maps.iter().map(|m| m[k]).collect()
    }

    /// Checks supports map into leg supports and surjectivity onto the fibre product.
    pub fn check(&self) -> Result<()> {
        if self.legs.len() != self.maps.len() {
            return Err(GerbeError::MalformedSurface("leg count".into()));
        }
        for (l, m) in self.legs.iter().zip(&self.maps) {
            if *l.base != *self.cover.base || m.len() != self.cover.len() {
                return Err(GerbeError::SiteMismatch);
            }
            for k in 0..self.cover.len() {
                if !self.cover.support(k).is_subset(l.support(m[k])) {
                    return Err(GerbeError::MalformedSurface(format!(
                        "support of {} exceeds its leg image",
                        self.cover.label_string(k)
                    )));
                }
            }
        }
        for x in self.cover.simplices() {
            let have: std::collections::BTreeSet<Vec<usize>> =
                self.cover.at(x).iter().map(|&k| self.image(k)).collect();
            let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
            for l in &self.legs {
                let mut next = Vec::new();
                for t in &tuples {
                    for &i in l.at(x) {
                        let mut t2 = t.clone();
                        t2.push(i);
                        next.push(t2);
                    }
                }
                tuples = next;
            }
            let compatible = |t: &Vec<usize>| match &self.over {
                None => true,
                Some(ov) => t.iter().enumerate().all(|(l, &i)| ov[l][i] == ov[0][t[0]]),
            };
            if let Some(t) = tuples.iter().find(|t| compatible(t) && !have.contains(*t)) {
                return Err(GerbeError::EmptyRefinement(format!("no index over {t:?} on {x:?}")));
            }
        }
        Ok(())
    }

    /// The fibre product itself with projections as legs.
    pub fn identity(legs: Vec<Arc<Cover>>) -> Result<Self> {
        let refs: Vec<&Cover> = legs.iter().map(|c| c.as_ref()).collect();
        let (p, maps) = fiber_product(&refs)?;
        Ok(Refinement { cover: Arc::new(p), legs, maps, over: None })
    }

    /// Pulls the whole refinement back along a map into the base.
    pub fn pullback(&self, f: &SimplicialMap, legs: Vec<Arc<Cover>>) -> Result<Self> {
        Ok(Refinement {
            cover: Arc::new(self.cover.pullback(f)?),
            legs,
            maps: self.maps.clone(),
            over: self.over.clone(),
        })
    }
}

/// Pairs `(k₁, k₂)` with equal leg images and overlapping support, with legs into both.
pub fn common_refinement(r1: &Refinement, r2: &Refinement) -> Result<(Refinement, Vec<(usize, usize)>)> {
    if r1.legs.len() != r2.legs.len() || r1.legs.iter().zip(&r2.legs).any(|(a, b)| **a != **b) {
        return Err(GerbeError::SiteMismatch);
    }
    let (c, pairs) = product_cover(&r1.cover, &r2.cover, |k1, k2| r1.image(k1) == r2.image(k2))?;
    let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut p_image = |r: &Refinement| -> Vec<usize> {
        (0..r.cover.len())
            .map(|k| {
                let n = ids.len();
                *ids.entry(r.image(k)).or_insert(n)
            })
            .collect()
    };
    let over = vec![p_image(r1), p_image(r2)];
    let r = Refinement {
        cover: Arc::new(c),
        legs: vec![r1.cover.clone(), r2.cover.clone()],
        maps: vec![pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect()],
        over: Some(over),
    };
    for x in r.cover.simplices() {
        for &k1 in r1.cover.at(x) {
            for &k2 in r2.cover.at(x) {
                if r1.image(k1) == r2.image(k2) && !r.cover.at(x).iter().any(|&k| pairs[k] == (k1, k2)) {
                    return Err(GerbeError::EmptyRefinement(format!("common refinement misses {x:?}")));
                }
            }
        }
    }
    Ok((r, pairs))
}

/// Descent data `(A, d)` on a refinement `ζ: K → P`.
#[derive(Debug, Clone)]
pub struct DescentDatum {
    pub target: Arc<Cover>,
    /// `ζ` on indices.
    pub zeta: Vec<usize>,
    pub bundle: DiscreteBundle,
    /// `d(v, k, k'): A_k → A_{k'}` for `ζ(k) = ζ(k')`, both valid at `v`.
    pub d: BTreeMap<(usize, usize, usize), CMat>,
}

/// Result of gluing: a bundle over `P` and isomorphisms `β(v, k): S_{ζ(k)} → A_k`.
#[derive(Debug, Clone)]
pub struct Glued {
    pub bundle: DiscreteBundle,
    pub beta: BTreeMap<(usize, usize), CMat>,
    /// The section `sec(p, v)` used at each vertex.
    pub vertex_section: BTreeMap<(usize, usize), usize>,
}

impl DescentDatum {
    /// Checks the cocycle condition and compatibility with transports.
    pub fn check(&self) -> Result<()> {
        let eps = tolerance();
        let k = self.bundle.cover();
        let base = k.base();
        let get = |v, a, b| -> Result<&CMat> {
            self.d.get(&(v, a, b)).ok_or_else(|| GerbeError::InvalidDescent(format!("missing d at {v} ({a},{b})")))
        };
        for v in 0..base.n_vertices() {
            let ks = k.at_vertex(v);
            for &a in ks {
                for &b in ks {
                    if self.zeta[a] != self.zeta[b] {
                        continue;
                    }
                    for &c in ks {
                        if self.zeta[c] != self.zeta[a] {
                            continue;
                        }
                        let lhs = get(v, a, c)?;
                        let rhs = get(v, b, c)? * get(v, a, b)?;
                        if !approx_eq(lhs, &rhs, eps) {
                            return Err(GerbeError::InvalidDescent(format!("cocycle fails at vertex {v}")));
                        }
                    }
                }
            }
        }
        for e in 0..base.n_edges() {
            let [v0, v1] = base.edge(e);
            let ks = k.at_edge(e);
            for &a in ks {
                for &b in ks {
                    if self.zeta[a] != self.zeta[b] {
                        continue;
                    }
                    let lhs = self.bundle.transport(b, e) * get(v0, a, b)?;
                    let rhs = get(v1, a, b)? * self.bundle.transport(a, e);
                    if !approx_eq(&lhs, &rhs, eps) {
                        return Err(GerbeError::InvalidDescent(format!("d not parallel along edge {e}")));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn glue(&self) -> Result<Glued> {
        self.check()?;
        Ok(glue_with(&self.target, &self.zeta, &self.bundle, |v, a, b| self.d[&(v, a, b)].clone()))
    }
}

/// Glues along lexicographically least sections without re-checking the datum.
pub fn glue_with(
    target: &Arc<Cover>,
    zeta: &[usize],
    bundle: &DiscreteBundle,
    d: impl Fn(usize, usize, usize) -> CMat,
) -> Glued {
    let k = bundle.cover();
    let base = k.base().clone();
    let n = bundle.rank();
    let sec = |p: usize, ks: &[usize]| ks.iter().copied().find(|&x| zeta[x] == p);
    let dd = |v: usize, a: usize, b: usize| if a == b { identity(n) } else { d(v, a, b) };
    let mut transport = vec![vec![None; base.n_edges()]; target.len()];
    let mut tc = vec![vec![None; base.n_triangles()]; target.len()];
    let mut vertex_section = BTreeMap::new();
    for p in 0..target.len() {
        for v in 0..base.n_vertices() {
            if target.valid(p, Simplex::V(v)) {
                let s = sec(p, k.at_vertex(v)).expect("refinement covers every vertex");
                vertex_section.insert((p, v), s);
            }
        }
        for e in 0..base.n_edges() {
            if !target.valid(p, Simplex::E(e)) {
                continue;
            }
            let ke = sec(p, k.at_edge(e)).expect("refinement covers every edge");
            let [v0, v1] = base.edge(e);
            let (s0, s1) = (vertex_section[&(p, v0)], vertex_section[&(p, v1)]);
            let a = bundle.transport(ke, e);
            let u = if s0 == ke && s1 == ke { a.clone() } else { dd(v1, ke, s1) * a * dd(v0, s0, ke) };
            transport[p][e] = Some(u);
        }
        for t in 0..base.n_triangles() {
            if target.valid(p, Simplex::T(t)) {
                let kt = sec(p, k.at_triangle(t)).expect("refinement covers every triangle");
                tc[p][t] = Some(bundle.trace_curv(kt, t));
            }
        }
    }
    let mut beta = BTreeMap::new();
    for v in 0..base.n_vertices() {
        for &kk in k.at_vertex(v) {
            let s = vertex_section[&(zeta[kk], v)];
            beta.insert((v, kk), dd(v, s, kk));
        }
    }
    let s = DiscreteBundle::from_parts(target.clone(), n, transport, tc);
    Glued { bundle: s, beta, vertex_section }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_unitary, C64};
    use crate::surface::builders::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_index_cover() -> Cover {
        let base = Arc::new(torus7());
        let a: Vec<usize> = (0..8).collect();
        let b: Vec<usize> = (6..14).collect();
        Cover::from_triangle_sets(base, &[a, b]).unwrap()
    }

    #[test]
    fn singleton_fiber_product_is_identity() {
        let c = two_index_cover();
        let (p, legs) = fiber_product(&[&c]).unwrap();
        assert_eq!(p, c);
        assert_eq!(legs, vec![vec![0, 1]]);
    }

    #[test]
    fn fiber_product_is_strictly_associative() {
        let c = two_index_cover();
        let (ab, _) = fiber_product(&[&c, &c]).unwrap();
        let (ab_c, _) = fiber_product(&[&ab, &c]).unwrap();
        let (bc, _) = fiber_product(&[&c, &c]).unwrap();
        let (a_bc, _) = fiber_product(&[&c, &bc]).unwrap();
        assert_eq!(ab_c, a_bc);
        assert!(ab.len() <= c.len() * c.len());
    }

    #[test]
    fn disjoint_supports_are_dropped() {
        let base = Arc::new(square_disc());
        let c = Cover::from_triangle_sets(base, &[vec![0], vec![1]]).unwrap();
        let (p, _) = fiber_product(&[&c, &c]).unwrap();
        // all pairs overlap along the shared diagonal
        assert_eq!(p.len(), 4);
        assert!(p.at_triangle(0).len() == 1 && p.at_triangle(1).len() == 1);
    }

    #[test]
    fn uncovered_triangle_rejected() {
        let base = Arc::new(torus7());
        assert!(matches!(
            Cover::from_triangle_sets(base, &[vec![0, 1, 2]]),
            Err(GerbeError::EmptyRefinement(_))
        ));
    }

    #[test]
    fn common_refinement_contains_diagonal() {
        let c = Arc::new(two_index_cover());
        let r = Refinement::identity(vec![c.clone(), c.clone()]).unwrap();
        let (cr, pairs) = common_refinement(&r, &r).unwrap();
        for k in 0..r.cover.len() {
            assert!(pairs.contains(&(k, k)));
        }
        cr.check().unwrap();
    }

    #[test]
    fn glue_identity_datum_returns_bundle() {
        let c = Arc::new(two_index_cover());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bundle = DiscreteBundle::random(c.clone(), 2, &mut rng);
        let mut d = BTreeMap::new();
        for v in 0..c.base().n_vertices() {
            for &k in c.at_vertex(v) {
                d.insert((v, k, k), identity(2));
            }
        }
        let dd = DescentDatum { target: c.clone(), zeta: vec![0, 1], bundle: bundle.clone(), d };
        let g = dd.glue().unwrap();
        assert_eq!(g.bundle, bundle);
        assert!(g.beta.values().all(|m| *m == identity(2)));
    }

    #[test]
    fn glue_duplicated_indices() {
        // K = two copies of each P-index, related by random constant gauges
        let base = Arc::new(torus7());
        let p = Arc::new(Cover::from_triangle_sets(base.clone(), &[(0..8).collect(), (6..14).collect()]).unwrap());
        let supports: Vec<Support> = (0..4).map(|k| p.support(k / 2).clone()).collect();
        let labels = (0..4).map(|k| vec![format!("k{k}")]).collect();
        let kc = Arc::new(Cover::new(base.clone(), labels, supports).unwrap());
        let zeta = vec![0, 0, 1, 1];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s0 = DiscreteBundle::random(p.clone(), 2, &mut rng);
        let g: Vec<CMat> = (0..4).map(|_| random_unitary(&mut rng, 2)).collect();
        let mut transport = vec![vec![None; base.n_edges()]; 4];
        let mut tc = vec![vec![None; base.n_triangles()]; 4];
        for k in 0..4 {
            for e in 0..base.n_edges() {
                if kc.valid(k, Simplex::E(e)) {
                    transport[k][e] = Some(&g[k] * s0.transport(zeta[k], e) * g[k].adjoint());
                }
            }
            for t in 0..base.n_triangles() {
                if kc.valid(k, Simplex::T(t)) {
                    tc[k][t] = Some(s0.trace_curv(zeta[k], t));
                }
            }
        }
        let a = DiscreteBundle::new(kc.clone(), 2, transport, tc).unwrap();
        let mut d = BTreeMap::new();
        for v in 0..base.n_vertices() {
            for &k1 in kc.at_vertex(v) {
                for &k2 in kc.at_vertex(v) {
                    if zeta[k1] == zeta[k2] {
                        d.insert((v, k1, k2), &g[k2] * g[k1].adjoint());
                    }
                }
            }
        }
        let dd = DescentDatum { target: p.clone(), zeta: zeta.clone(), bundle: a.clone(), d: d.clone() };
        let glued = dd.glue().unwrap();
        assert_eq!(glued.bundle.rank(), 2);
        for q in 0..2 {
            for t in 0..base.n_triangles() {
                if p.valid(q, Simplex::T(t)) {
                    assert_eq!(glued.bundle.trace_curv(q, t), s0.trace_curv(q, t));
                }
            }
        }
        glued.bundle.check().unwrap();
        // β ∘ (transition on S) ∘ β⁻¹ reproduces d
        for (&(v, k1, k2), m) in &d {
            let lhs = &glued.beta[&(v, k2)] * glued.beta[&(v, k1)].adjoint();
            assert!(approx_eq(&lhs, m, 1e-12));
        }
        // a corrupted cocycle is rejected
        let mut bad = dd.clone();
        let key = *d.keys().find(|(_, a, b)| a != b).unwrap();
        bad.d.insert(key, &d[&key] * C64::new(0.0, 1.0));
        assert!(matches!(bad.glue(), Err(GerbeError::InvalidDescent(_))));
    }
}
