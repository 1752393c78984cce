//! Finite simplicial surfaces, simplicial maps, involutions, orientation
//! double covers, fundamental domains and their projected boundaries.

use crate::error::{GerbeError, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

/// A 2-dimensional simplicial complex in which every edge lies in at most
/// two triangles. One-dimensional complexes (no triangles) are allowed so
/// that boundaries and brane supports can be represented with the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialSurface {
    names: Vec<String>,
    edges: Vec<[usize; 2]>,
    triangles: Vec<[usize; 3]>,
    tri_edges: Vec<[(usize, i8); 3]>,
    edge_tris: Vec<Vec<usize>>,
    edge_lookup: BTreeMap<(usize, usize), usize>,
    orientation: Option<Vec<i8>>,
    orientable: bool,
}

/// One oriented edge of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub edge: usize,
    pub forward: bool,
}

/// A closed edge path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub steps: Vec<Step>,
}

impl Step {
    pub fn tail(&self, s: &SimplicialSurface) -> usize {
        let [a, b] = s.edge(self.edge);
        if self.forward {
            a
        } else {
            b
        }
    }
    pub fn head(&self, s: &SimplicialSurface) -> usize {
        let [a, b] = s.edge(self.edge);
        if self.forward {
            b
        } else {
            a
        }
    }
}

impl Cycle {
    /// Vertex sequence `v0, v1, ..., v_{n-1}` with `v_n = v0` implied.
    pub fn vertices(&self, s: &SimplicialSurface) -> Vec<usize> {
        self.steps.iter().map(|st| st.tail(s)).collect()
    }
    pub fn len(&self) -> usize {
        self.steps.len()
    }
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SimplicialSurface {
    /// General constructor from explicit edges and triangles. Edges used by a
    /// triangle but missing from `edges` are appended as `(min, max)`.
    pub fn from_complex(
        names: Vec<String>,
        edges: Vec<[usize; 2]>,
        triangles: Vec<[usize; 3]>,
        orient: bool,
    ) -> Result<Self> {
        let nv = names.len();
        let mut edge_lookup = BTreeMap::new();
        let mut all_edges = Vec::new();
        for e in edges {
            if e[0] == e[1] || e[0] >= nv || e[1] >= nv {
                return Err(GerbeError::MalformedSurface(format!("bad edge {e:?}")));
            }
            if edge_lookup.insert(key(e[0], e[1]), all_edges.len()).is_some() {
                return Err(GerbeError::MalformedSurface(format!("duplicate edge {e:?}")));
            }
            all_edges.push(e);
        }
        let mut seen_tris = BTreeSet::new();
        for t in &triangles {
            if t.iter().any(|&v| v >= nv) || t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                return Err(GerbeError::MalformedSurface(format!("bad triangle {t:?}")));
            }
            let mut sorted = *t;
            sorted.sort();
            if !seen_tris.insert(sorted) {
                return Err(GerbeError::MalformedSurface(format!("duplicate triangle {t:?}")));
            }
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                if !edge_lookup.contains_key(&key(a, b)) {
                    edge_lookup.insert(key(a, b), all_edges.len());
                    all_edges.push([a.min(b), a.max(b)]);
                }
            }
        }
        let mut edge_tris = vec![Vec::new(); all_edges.len()];
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (ti, t) in triangles.iter().enumerate() {
            let mut te = [(0usize, 0i8); 3];
            for (slot, (a, b)) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].into_iter().enumerate() {
                let e = edge_lookup[&key(a, b)];
                let sign = if all_edges[e] == [a, b] { 1 } else { -1 };
                te[slot] = (e, sign);
                edge_tris[e].push(ti);
                if edge_tris[e].len() > 2 {
                    let [x, y] = all_edges[e];
                    return Err(GerbeError::NonManifoldEdge((names[x].clone(), names[y].clone())));
                }
            }
            tri_edges.push(te);
        }
        let mut s = SimplicialSurface {
            names,
            edges: all_edges,
            triangles,
            tri_edges,
            edge_tris,
            edge_lookup,
            orientation: None,
            orientable: false,
        };
        let signs = s.propagate_orientation();
        s.orientable = signs.is_some();
        if orient {
            s.orientation = signs;
        }
        Ok(s)
    }

    /// Builds a surface from triangles, deriving edges as `(min, max)` pairs.
    pub fn build(names: Vec<String>, triangles: Vec<[usize; 3]>, orient: bool) -> Result<Self> {
        if triangles.is_empty() {
            return Err(GerbeError::MalformedSurface("empty triangle list".into()));
        }
        Self::from_complex(names, Vec::new(), triangles, orient)
    }

    /// Builds from named triangles; vertex order is order of first appearance.
    pub fn build_named(triangles: &[[&str; 3]], orient: bool) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut idx = BTreeMap::new();
        let mut tris = Vec::new();
        for t in triangles {
            let mut tri = [0; 3];
            for (k, n) in t.iter().enumerate() {
                let id = *idx.entry(n.to_string()).or_insert_with(|| {
                    names.push(n.to_string());
                    names.len() - 1
                });
                tri[k] = id;
            }
            tris.push(tri);
        }
        Self::build(names, tris, orient)
    }

    /// Replaces the orientation by explicit per-triangle signs after checking coherence.
    pub fn with_orientation(mut self, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != self.triangles.len() || signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(GerbeError::MalformedSurface("orientation length or value".into()));
        }
        for (e, ts) in self.edge_tris.iter().enumerate() {
            if let [t1, t2] = ts[..] {
                let s1 = self.incidence(t1, e) * signs[t1];
                let s2 = self.incidence(t2, e) * signs[t2];
                if s1 != -s2 {
                    return Err(GerbeError::MalformedSurface("incoherent orientation".into()));
                }
            }
        }
        self.orientation = Some(signs);
        self.orientable = true;
        Ok(self)
    }

    pub fn without_orientation(mut self) -> Self {
        self.orientation = None;
        self
    }

    fn propagate_orientation(&self) -> Option<Vec<i8>> {
        let nt = self.triangles.len();
        let mut signs = vec![0i8; nt];
        for root in 0..nt {
            if signs[root] != 0 {
                continue;
            }
            signs[root] = 1;
            let mut queue = VecDeque::from([root]);
            while let Some(t) = queue.pop_front() {
                for &(e, inc) in &self.tri_edges[t] {
                    for &u in &self.edge_tris[e] {
                        if u == t {
                            continue;
                        }
                        let want = -(inc * signs[t]) * self.incidence(u, e);
                        if signs[u] == 0 {
                            signs[u] = want;
                            queue.push_back(u);
                        } else if signs[u] != want {
                            return None;
                        }
                    }
                }
            }
        }
        Some(signs)
    }

    pub fn n_vertices(&self) -> usize {
        self.names.len()
    }
    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }
    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }
    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn edge(&self, e: usize) -> [usize; 2] {
        self.edges[e]
    }
    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }
    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }
    /// Boundary edges of `t` in cyclic order with incidence signs.
    pub fn triangle_edges(&self, t: usize) -> [(usize, i8); 3] {
        self.tri_edges[t]
    }
    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_tris[e]
    }
    /// Incidence sign of edge `e` in the boundary of `t` (0 if not a face).
    pub fn incidence(&self, t: usize, e: usize) -> i8 {
        self.tri_edges[t].iter().find(|(x, _)| *x == e).map(|(_, s)| *s).unwrap_or(0)
    }
    /// Edge between `a` and `b` with sign `+1` if `a -> b` is canonical.
    pub fn find_edge(&self, a: usize, b: usize) -> Option<(usize, i8)> {
        self.edge_lookup.get(&key(a, b)).map(|&e| (e, if self.edges[e][0] == a { 1 } else { -1 }))
    }
    /// Triangle with vertex set `{a,b,c}`, with sign `+1` if `(a,b,c)` is its cyclic order.
    pub fn find_triangle(&self, a: usize, b: usize, c: usize) -> Option<(usize, i8)> {
        let (e, _) = self.find_edge(a, b)?;
        for &t in &self.edge_tris[e] {
            let tri = self.triangles[t];
            if tri.contains(&c) {
                let rot = [tri, [tri[1], tri[2], tri[0]], [tri[2], tri[0], tri[1]]];
                let sign = if rot.contains(&[a, b, c]) { 1 } else { -1 };
                return Some((t, sign));
            }
        }
        None
    }
    pub fn orientation(&self) -> Option<&[i8]> {
        self.orientation.as_deref()
    }
    /// Orientation sign of `t`, or `None` when unoriented.
    pub fn orientation_sign(&self, t: usize) -> Option<i8> {
        self.orientation.as_ref().map(|o| o[t])
    }
    pub fn is_orientable(&self) -> bool {
        self.orientable
    }
    pub fn is_closed(&self) -> bool {
        !self.triangles.is_empty() && self.edge_tris.iter().all(|ts| ts.len() == 2)
    }
    pub fn euler_characteristic(&self) -> i64 {
        self.names.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }
    pub fn boundary_edge_ids(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edge_tris[e].len() == 1).collect()
    }
    pub fn vertex_edges(&self, v: usize) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].contains(&v)).collect()
    }

    /// Boundary cycles, traversed as induced by the orientation when present and
    /// by the triangles' cyclic order otherwise.
    pub fn boundary_cycles(&self) -> Result<Vec<Cycle>> {
        let steps: Vec<Step> = self
            .boundary_edge_ids()
            .into_iter()
            .map(|e| {
                let t = self.edge_tris[e][0];
                let o = self.orientation_sign(t).unwrap_or(1);
                Step { edge: e, forward: self.incidence(t, e) * o > 0 }
            })
            .collect();
        chain_cycles(self, steps)
    }

    /// Connected components of the triangle adjacency graph.
    pub fn triangle_components(&self) -> Vec<usize> {
        let nt = self.triangles.len();
        let mut comp = vec![usize::MAX; nt];
        let mut c = 0;
        for root in 0..nt {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = c;
            let mut q = VecDeque::from([root]);
            while let Some(t) = q.pop_front() {
                for &(e, _) in &self.tri_edges[t] {
                    for &u in &self.edge_tris[e] {
                        if comp[u] == usize::MAX {
                            comp[u] = c;
                            q.push_back(u);
                        }
                    }
                }
            }
            c += 1;
        }
        comp
    }

    /// Connected components of the 1-skeleton, one label per vertex.
    pub fn vertex_components(&self) -> Vec<usize> {
        let nv = self.names.len();
        let mut adj = vec![Vec::new(); nv];
        for &[a, b] in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut comp = vec![usize::MAX; nv];
        let mut c = 0;
        for root in 0..nv {
            if comp[root] != usize::MAX {
                continue;
            }
            comp[root] = c;
            let mut q = VecDeque::from([root]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = c;
                        q.push_back(w);
                    }
                }
            }
            c += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_components().iter().all(|&c| c == 0)
    }
}

/// Splits a balanced set of oriented edges into closed walks, always
/// continuing along the smallest unused edge.
pub fn chain_cycles(s: &SimplicialSurface, steps: Vec<Step>) -> Result<Vec<Cycle>> {
    let mut out_steps: BTreeMap<usize, BTreeSet<Step>> = BTreeMap::new();
    for st in &steps {
        out_steps.entry(st.tail(s)).or_default().insert(*st);
    }
    let mut remaining: BTreeSet<Step> = steps.into_iter().collect();
    let mut cycles = Vec::new();
    while let Some(&first) = remaining.iter().next() {
        let start = first.tail(s);
        let mut cur = first;
        let mut cyc = Vec::new();
        loop {
            remaining.remove(&cur);
            out_steps.get_mut(&cur.tail(s)).unwrap().remove(&cur);
            cyc.push(cur);
            let v = cur.head(s);
            if v == start {
                break;
            }
            let next = out_steps.get(&v).and_then(|set| set.iter().next().copied());
            match next {
                Some(n) => cur = n,
                None => {
                    return Err(GerbeError::MalformedSurface(
                        "oriented edge set is not a union of cycles".into(),
                    ))
                }
            }
        }
        cycles.push(Cycle { steps: cyc });
    }
    Ok(cycles)
}

/// Image of an edge under a simplicial map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeImage {
    Edge { edge: usize, sign: i8 },
    Vertex(usize),
}

/// Image of a triangle under a simplicial map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriangleImage {
    Triangle { tri: usize, sign: i8 },
    Degenerate,
}

/// A vertex map sending every simplex onto a (possibly lower-dimensional) simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplicialMap {
    pub source: Arc<SimplicialSurface>,
    pub target: Arc<SimplicialSurface>,
    vmap: Vec<usize>,
    edge_img: Vec<EdgeImage>,
    tri_img: Vec<TriangleImage>,
}

impl SimplicialMap {
    pub fn new(
        source: Arc<SimplicialSurface>,
        target: Arc<SimplicialSurface>,
        vmap: Vec<usize>,
    ) -> Result<Self> {
        if vmap.len() != source.n_vertices() || vmap.iter().any(|&v| v >= target.n_vertices()) {
            return Err(GerbeError::NotSimplicial("vertex map size or range".into()));
        }
        let mut edge_img = Vec::with_capacity(source.n_edges());
        for &[a, b] in source.edges() {
            let (fa, fb) = (vmap[a], vmap[b]);
            if fa == fb {
                edge_img.push(EdgeImage::Vertex(fa));
            } else {
                let (edge, sign) = target.find_edge(fa, fb).ok_or_else(|| {
                    GerbeError::NotSimplicial(format!("edge {}-{}", source.name(a), source.name(b)))
                })?;
                edge_img.push(EdgeImage::Edge { edge, sign });
            }
        }
        let mut tri_img = Vec::with_capacity(source.n_triangles());
        for &[a, b, c] in source.triangles() {
            let (fa, fb, fc) = (vmap[a], vmap[b], vmap[c]);
            if fa == fb || fb == fc || fa == fc {
                tri_img.push(TriangleImage::Degenerate);
            } else {
                let (tri, sign) = target.find_triangle(fa, fb, fc).ok_or_else(|| {
                    GerbeError::NotSimplicial(format!(
                        "triangle {} {} {}",
                        source.name(a),
                        source.name(b),
                        source.name(c)
                    ))
                })?;
                tri_img.push(TriangleImage::Triangle { tri, sign });
            }
        }
        Ok(SimplicialMap { source, target, vmap, edge_img, tri_img })
    }

    pub fn identity(s: Arc<SimplicialSurface>) -> Self {
        let n = s.n_vertices();
        Self::new(s.clone(), s, (0..n).collect()).expect("identity is simplicial")
    }

    pub fn vertex(&self, v: usize) -> usize {
        self.vmap[v]
    }
    pub fn vertex_map(&self) -> &[usize] {
        &self.vmap
    }
    pub fn edge(&self, e: usize) -> EdgeImage {
        self.edge_img[e]
    }
    pub fn triangle(&self, t: usize) -> TriangleImage {
        self.tri_img[t]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &SimplicialMap) -> Result<SimplicialMap> {
        if *self.target != *other.source {
            return Err(GerbeError::BaseMismatch);
        }
        let vmap = self.vmap.iter().map(|&v| other.vmap[v]).collect();
        SimplicialMap::new(self.source.clone(), other.target.clone(), vmap)
    }

    pub fn is_identity(&self) -> bool {
        *self.source == *self.target && self.vmap.iter().enumerate().all(|(i, &v)| i == v)
    }
}

/// A simplicial self-map with `k ∘ k = id`.
#[derive(Debug, Clone, PartialEq)]
pub struct Involution(pub SimplicialMap);

impl Involution {
    pub fn new(map: SimplicialMap) -> Result<Self> {
        if *map.source != *map.target {
            return Err(GerbeError::NotSimplicial("involution must be a self-map".into()));
        }
        if map.vmap.iter().enumerate().any(|(v, &w)| map.vmap[w] != v) {
            return Err(GerbeError::NotSimplicial("map does not square to the identity".into()));
        }
        Ok(Involution(map))
    }
    pub fn map(&self) -> &SimplicialMap {
        &self.0
    }
}

/// The oriented two-fold cover of a closed surface.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationCover {
    pub base: Arc<SimplicialSurface>,
    pub cover: Arc<SimplicialSurface>,
    pub pr: SimplicialMap,
    pub sigma: Involution,
    /// The two lifts of each base triangle.
    pub lifts: Vec<[usize; 2]>,
    /// Base triangle of each cover triangle.
    pub tri_base: Vec<usize>,
}

/// Builds the orientation double cover. Lifted vertices are pairs of a base
/// vertex with one of the two orientations of its star.
pub fn orientation_cover(base: Arc<SimplicialSurface>) -> Result<OrientationCover> {
    if !base.is_closed() {
        return Err(GerbeError::NotClosed);
    }
    let nv = base.n_vertices();
    let mut link_pos: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); nv];
    for a in 0..nv {
        let mut succ: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        let mut first: Option<(usize, usize)> = None;
        for &t in base.triangles() {
            if let Some(pos) = t.iter().position(|&x| x == a) {
                let p = t[(pos + 1) % 3];
                let q = t[(pos + 2) % 3];
                succ.entry(p).or_default().push(q);
                succ.entry(q).or_default().push(p);
                if first.is_none() {
                    first = Some((p, q));
                }
            }
        }
        let (p, q) = first.ok_or_else(|| GerbeError::MalformedSurface("isolated vertex".into()))?;
        let mut order = vec![p, q];
        let (mut prev, mut cur) = (p, q);
        loop {
            let nbrs = &succ[&cur];
            if nbrs.len() != 2 {
                return Err(GerbeError::MalformedSurface(format!(
                    "link of {} is not a cycle",
                    base.name(a)
                )));
            }
            let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
            if next == p {
                break;
            }
            order.push(next);
            prev = cur;
            cur = next;
            if order.len() > succ.len() {
                return Err(GerbeError::MalformedSurface("link walk did not close".into()));
            }
        }
        if order.len() != succ.len() {
            return Err(GerbeError::MalformedSurface(format!(
                "link of {} is disconnected",
                base.name(a)
            )));
        }
        link_pos[a] = order.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    }
    // +1 if the cyclic order of `t` induces the reference direction on link(a).
    let label = |a: usize, p: usize, q: usize| -> usize {
        let pos = &link_pos[a];
        let n = pos.len();
        if (pos[&p] + 1) % n == pos[&q] {
            0
        } else {
            1
        }
    };
    let mut names = Vec::with_capacity(2 * nv);
    for v in 0..nv {
        names.push(format!("{}+", base.name(v)));
        names.push(format!("{}-", base.name(v)));
    }
    let mut tris = Vec::with_capacity(2 * base.n_triangles());
    let mut lifts = Vec::new();
    let mut tri_base = Vec::new();
    for (ti, &[a, b, c]) in base.triangles().iter().enumerate() {
        let la = label(a, b, c);
        let lb = label(b, c, a);
        let lc = label(c, a, b);
        tris.push([2 * a + la, 2 * b + lb, 2 * c + lc]);
        tris.push([2 * a + (1 - la), 2 * c + (1 - lc), 2 * b + (1 - lb)]);
        lifts.push([2 * ti, 2 * ti + 1]);
        tri_base.push(ti);
        tri_base.push(ti);
    }
    let n_cover_tris = tris.len();
    let cover = SimplicialSurface::build(names, tris, false)?.with_orientation(vec![1; n_cover_tris])?;
    let cover = Arc::new(cover);
    let pr = SimplicialMap::new(cover.clone(), base.clone(), (0..2 * nv).map(|v| v / 2).collect())?;
    let sigma = Involution::new(SimplicialMap::new(
        cover.clone(),
        cover.clone(),
        (0..2 * nv).map(|v| v ^ 1).collect(),
    )?)?;
    Ok(OrientationCover { base, cover, pr, sigma, lifts, tri_base })
}

impl OrientationCover {
    /// The other lift of a cover triangle.
    pub fn sigma_triangle(&self, t: usize) -> usize {
        t ^ 1
    }
    /// The cover edge of cover triangle `t` lying over base edge `e`.
    pub fn lifted_edge(&self, t: usize, base_edge: usize) -> usize {
        for &(ce, _) in &self.cover.triangle_edges(t) {
            if let EdgeImage::Edge { edge, .. } = self.pr.edge(ce) {
                if edge == base_edge {
                    return ce;
                }
            }
        }
        panic!("cover triangle {t} has no edge over base edge {base_edge}");
    }
}

/// One chosen lift per base triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalDomain {
    /// For each base triangle, 0 or 1 selecting `lifts[t][choice]`.
    pub choice: Vec<u8>,
}

/// A boundary edge of a fundamental domain, projected to the base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DomainBoundaryEdge {
    pub step: Step,
    /// Base triangle whose chosen lift induces the orientation.
    pub base_triangle: usize,
    /// The lift of the edge inside that chosen lift.
    pub lifted_edge: usize,
}

impl FundamentalDomain {
    /// Grows a domain by breadth-first search across base edges, keeping lifts
    /// adjacent whenever possible. On an orientable base this is a whole sheet.
    pub fn grown(oc: &OrientationCover, root: usize, root_choice: u8) -> Self {
        let base = &oc.base;
        let nt = base.n_triangles();
        let mut choice = vec![u8::MAX; nt];
        for start in std::iter::once(root).chain(0..nt) {
            if choice[start] != u8::MAX {
                continue;
            }
            choice[start] = if start == root { root_choice } else { 0 };
            let mut q = VecDeque::from([start]);
            while let Some(t) = q.pop_front() {
                let lt = oc.lifts[t][choice[t] as usize];
                for &(e, _) in &base.triangle_edges(t) {
                    let le = oc.lifted_edge(lt, e);
                    for &u in base.edge_triangles(e) {
                        if u == t || choice[u] != u8::MAX {
                            continue;
                        }
                        let c = if oc.cover.edge_triangles(le).contains(&oc.lifts[u][0]) { 0 } else { 1 };
                        choice[u] = c;
                        q.push_back(u);
                    }
                }
            }
        }
        FundamentalDomain { choice }
    }

    /// The chosen cover triangle over base triangle `t`.
    pub fn lift(&self, oc: &OrientationCover, t: usize) -> usize {
        oc.lifts[t][self.choice[t] as usize]
    }

    pub fn triangles(&self, oc: &OrientationCover) -> Vec<usize> {
        (0..self.choice.len()).map(|t| self.lift(oc, t)).collect()
    }

    pub fn flipped(&self, t: usize) -> Self {
        let mut c = self.clone();
        c.choice[t] ^= 1;
        c
    }

    /// Base edges where the chosen lifts of the two incident triangles do not
    /// share a lift of the edge, oriented by the first incident triangle's lift.
    pub fn boundary_edges(&self, oc: &OrientationCover) -> Vec<DomainBoundaryEdge> {
        let base = &oc.base;
        let mut out = Vec::new();
        for e in 0..base.n_edges() {
            let ts = base.edge_triangles(e);
            if ts.len() != 2 {
                continue;
            }
            let (l1, l2) = (self.lift(oc, ts[0]), self.lift(oc, ts[1]));
            let (e1, e2) = (oc.lifted_edge(l1, e), oc.lifted_edge(l2, e));
            if e1 == e2 {
                continue;
            }
            let o = oc.cover.orientation_sign(l1).unwrap_or(1);
            let inc = oc.cover.incidence(l1, e1) * o;
            let [ca, _] = oc.cover.edge(e1);
            let tail_cover = if inc > 0 { ca } else { oc.cover.edge(e1)[1] };
            let forward = oc.pr.vertex(tail_cover) == base.edge(e)[0];
            out.push(DomainBoundaryEdge {
                step: Step { edge: e, forward },
                base_triangle: ts[0],
                lifted_edge: e1,
            });
        }
        out
    }

    /// Checks one lift per base triangle and that no triangle meets its σ-image.
    pub fn is_valid(&self, oc: &OrientationCover) -> bool {
        if self.choice.len() != oc.base.n_triangles() || self.choice.iter().any(|&c| c > 1) {
            return false;
        }
        let f: BTreeSet<usize> = self.triangles(oc).into_iter().collect();
        f.iter().all(|&t| !f.contains(&oc.sigma_triangle(t)))
    }
}

/// A deterministic fundamental domain. Seed 0 grows a domain from triangle 0;
/// other seeds pick independent random lifts.
pub fn fundamental_domain(oc: &OrientationCover, seed: u64) -> FundamentalDomain {
    if seed == 0 {
        return FundamentalDomain::grown(oc, 0, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FundamentalDomain {
        choice: (0..oc.base.n_triangles()).map(|_| rng.random_range(0..2u8)).collect(),
    }
}

/// Oriented cycles of the projected domain boundary.
pub fn domain_boundary(oc: &OrientationCover, f: &FundamentalDomain) -> Result<Vec<Cycle>> {
    let steps = f.boundary_edges(oc).into_iter().map(|b| b.step).collect();
    chain_cycles(&oc.base, steps)
}

/// The boundary 1-complex of a surface and its inclusion.
pub fn boundary_complex(s: &Arc<SimplicialSurface>) -> Result<(Arc<SimplicialSurface>, SimplicialMap)> {
    let bedges = s.boundary_edge_ids();
    let mut verts: BTreeSet<usize> = BTreeSet::new();
    for &e in &bedges {
        verts.extend(s.edge(e));
    }
    let verts: Vec<usize> = verts.into_iter().collect();
    let pos: BTreeMap<usize, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let names = verts.iter().map(|&v| s.name(v).to_string()).collect();
    let edges = bedges.iter().map(|&e| [pos[&s.edge(e)[0]], pos[&s.edge(e)[1]]]).collect();
    let b = Arc::new(SimplicialSurface::from_complex(names, edges, Vec::new(), false)?);
    let incl = SimplicialMap::new(b.clone(), s.clone(), verts)?;
    Ok((b, incl))
}

/// Standard triangulations used throughout the tests and examples.
pub mod builders {
    use super::*;

    fn numbered(n: usize, prefix: &str) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// Two triangles forming a square with one boundary cycle of length 4.
    pub fn square_disc() -> SimplicialSurface {
        SimplicialSurface::build_named(&[["a", "b", "c"], ["a", "c", "d"]], true).unwrap()
    }

    /// The 7-vertex, 14-triangle torus.
    pub fn torus7() -> SimplicialSurface {
        let mut tris = Vec::new();
        for i in 0..7 {
            tris.push([i, (i + 1) % 7, (i + 3) % 7]);
            tris.push([i, (i + 3) % 7, (i + 2) % 7]);
        }
        SimplicialSurface::build(numbered(7, "v"), tris, true).unwrap()
    }

    /// The 6-vertex, 10-triangle projective plane.
    pub fn rp2() -> SimplicialSurface {
        let tris = vec![
            [0, 1, 2],
            [0, 2, 3],
            [0, 3, 4],
            [0, 4, 5],
            [0, 5, 1],
            [1, 2, 4],
            [2, 3, 5],
            [3, 4, 1],
            [4, 5, 2],
            [5, 1, 3],
        ];
        SimplicialSurface::build(numbered(6, "p"), tris, false).unwrap()
    }

    /// The octahedron, a sphere with 8 triangles.
    pub fn octahedron() -> SimplicialSurface {
        let mut tris = Vec::new();
        for (x, y, z) in [(0, 2, 4), (1, 2, 4), (0, 3, 4), (1, 3, 4), (0, 2, 5), (1, 2, 5), (0, 3, 5), (1, 3, 5)] {
            tris.push([x, y, z]);
        }
        SimplicialSurface::build(numbered(6, "o"), tris, true).unwrap()
    }

    fn grid(m: usize, n: usize, twisted: bool, orient: bool) -> Result<SimplicialSurface> {
        let id = |i: usize, j: usize| -> usize {
            let (i, j) = if i == m {
                (0, if twisted { (n - j % n) % n } else { j % n })
            } else {
                (i, j % n)
            };
            i * n + j
        };
        let mut tris = Vec::new();
        for i in 0..m {
            for j in 0..n {
                let p00 = id(i, j);
                let p10 = id(i + 1, j);
                let p01 = id(i, j + 1);
                let p11 = id(i + 1, j + 1);
                tris.push([p00, p10, p11]);
                tris.push([p00, p11, p01]);
            }
        }
        SimplicialSurface::build(numbered(m * n, "g"), tris, orient)
    }

    /// An `m × n` grid torus with diagonals (`m, n ≥ 3`).
    pub fn grid_torus(m: usize, n: usize) -> SimplicialSurface {
        grid(m, n, false, true).unwrap()
    }

    /// An `m × n` grid Klein bottle: the `i`-direction glues with a reflection.
    pub fn klein_bottle(m: usize, n: usize) -> Result<SimplicialSurface> {
        grid(m, n, true, false)
    }
}
