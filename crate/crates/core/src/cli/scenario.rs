//! Scenario documents. A scenario is a JSON object with sections `surface`,
//! `cover`, `gerbe`, `morphisms`, `map`, `jandl`, `brane` and `holonomy`.
//! Every id is a string: vertices are named, edges and triangles are given
//! by vertex names, cover indices by their labels, and complex numbers are
//! written `[re, im]`.

use crate::bundle::DiscreteBundle;
use crate::error::{GerbeError, Result};
use crate::gerbe::{BundleGerbe, CMap, MuMap, UMap};
use crate::holonomy::{DBrane, JandlStructure};
use crate::linalg::{CMat, C64};
use crate::site::{Cover, Label, Simplex, Support};
use crate::surface::{Involution, SimplicialMap, SimplicialSurface};
use crate::twocat::{compose_1, dual_1, identity_1, inverse_1, pullback_1, AlphaTable, Atomic, Canon, OneMorphism, TwoMorphism};
use serde::{Deserialize, Serialize};
use crate::HashMap;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type Complex = [f64; 2];
/// Row-major complex matrix.
pub type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub surface: BTreeMap<String, SurfaceDoc>,
    #[serde(default)]
    pub cover: BTreeMap<String, CoverDoc>,
    #[serde(default)]
    pub gerbe: BTreeMap<String, GerbeDoc>,
    #[serde(default)]
    pub morphisms: BTreeMap<String, MorphismDoc>,
    #[serde(default)]
    pub map: BTreeMap<String, MapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jandl: Option<JandlDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brane: Option<BraneDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holonomy: Option<HolonomyDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceDoc {
    pub vertices: Vec<String>,
    /// Edges in canonical orientation; edges of triangles not listed here are
    /// appended in sorted vertex order.
    #[serde(default)]
    pub edges: Vec<[String; 2]>,
    #[serde(default)]
    pub triangles: Vec<[String; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Vec<i8>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub source: String,
    pub target: String,
    pub vertices: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverDoc {
    pub base: String,
    pub indices: Vec<IndexDoc>,
}

/// One index with the maximal simplices of its support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexDoc {
    pub label: Label,
    pub support: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GerbeDoc {
    Explicit {
        cover: String,
        c: Vec<CEntry>,
        l: Vec<LEntry>,
        /// Defaults to `C_j − C_i` when empty.
        #[serde(default)]
        l_curv: Vec<LCurvEntry>,
        mu: Vec<MuEntry>,
    },
    Trivial {
        base: String,
        rho: Vec<f64>,
    },
    Dual {
        of: String,
    },
    Pullback {
        of: String,
        along: String,
    },
    Tensor {
        factors: [String; 2],
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CEntry {
    pub index: Label,
    pub triangle: [String; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LEntry {
    pub i: Label,
    pub j: Label,
    pub edge: [String; 2],
    pub transport: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LCurvEntry {
    pub i: Label,
    pub j: Label,
    pub triangle: [String; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuEntry {
    pub vertex: String,
    pub i: Label,
    pub j: Label,
    pub k: Label,
    pub value: Complex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MorphismDoc {
    /// A chain of explicit factors, the first applied first.
    Chain { factors: Vec<AtomicDoc> },
    Identity { gerbe: String },
    /// `outer ∘ inner`.
    Compose { outer: String, inner: String },
    Dual { of: String },
    Inverse { of: String },
    Pullback { of: String, along: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomicDoc {
    pub source: String,
    pub target: String,
    pub refinement: CoverDoc,
    /// Source-cover label under each refinement index.
    pub s: Vec<Label>,
    pub t: Vec<Label>,
    pub rank: usize,
    pub transport: Vec<TransportEntry>,
    pub trace_curv: Vec<CurvEntry>,
    pub alpha: Vec<AlphaEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportEntry {
    pub index: Label,
    pub edge: [String; 2],
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvEntry {
    pub index: Label,
    pub triangle: [String; 3],
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaEntry {
    pub vertex: String,
    pub k: Label,
    pub kp: Label,
    pub matrix: Matrix,
}

/// A 2-morphism in canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoDoc {
    pub source: String,
    pub target: String,
    pub values: Vec<TwoEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoEntry {
    pub vertex: String,
    pub z1: Label,
    pub z2: Label,
    pub matrix: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JandlDoc {
    pub gerbe: String,
    pub involution: String,
    pub a: String,
    pub phi: TwoDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BraneDoc {
    pub gerbe: String,
    pub inclusion: String,
    pub module: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Closed,
    Dbrane,
    Unoriented,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomyDoc {
    pub gerbe: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Map `φ: Σ → M`; the identity of the gerbe's base when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub worldsheet: Option<String>,
    /// Unoriented mode: the surface whose orientation cover carries the gerbe.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default)]
    pub domain_seed: u64,
}

fn err(msg: impl Into<String>) -> GerbeError {
    GerbeError::Scenario(msg.into())
}

pub fn complex(z: C64) -> Complex {
    [z.re, z.im]
}

pub fn from_complex(c: Complex) -> C64 {
    C64::new(c[0], c[1])
}

pub fn matrix(m: &CMat) -> Matrix {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| complex(m[(i, j)])).collect()).collect()
}

pub fn from_matrix(m: &Matrix) -> Result<CMat> {
    let n = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(err("ragged matrix"));
    }
    Ok(CMat::from_fn(n, cols, |i, j| from_complex(m[i][j])))
}

pub fn surface_doc(s: &SimplicialSurface) -> SurfaceDoc {
    let n = |v: usize| s.name(v).to_string();
    SurfaceDoc {
        vertices: s.names().to_vec(),
        edges: s.edges().iter().map(|&[a, b]| [n(a), n(b)]).collect(),
        triangles: s.triangles().iter().map(|&[a, b, c]| [n(a), n(b), n(c)]).collect(),
        orientation: s.orientation().map(<[i8]>::to_vec),
    }
}

pub fn load_surface(d: &SurfaceDoc) -> Result<SimplicialSurface> {
    let index: HashMap<&str, usize> = d.vertices.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
    if index.len() != d.vertices.len() {
        return Err(err("duplicate vertex name"));
    }
    let v = |n: &String| index.get(n.as_str()).copied().ok_or_else(|| err(format!("unknown vertex {n}")));
    let edges = d.edges.iter().map(|[a, b]| Ok([v(a)?, v(b)?])).collect::<Result<Vec<_>>>()?;
    let tris = d.triangles.iter().map(|[a, b, c]| Ok([v(a)?, v(b)?, v(c)?])).collect::<Result<Vec<_>>>()?;
    let s = SimplicialSurface::from_complex(d.vertices.clone(), edges, tris, false)?;
    match &d.orientation {
        Some(o) => s.with_orientation(o.clone()),
        None => Ok(s),
    }
}

fn vertex_of(s: &SimplicialSurface, n: &str) -> Result<usize> {
    s.vertex_index(n).ok_or_else(|| err(format!("unknown vertex {n}")))
}

fn edge_of(s: &SimplicialSurface, [a, b]: &[String; 2]) -> Result<usize> {
    let (a, b) = (vertex_of(s, a)?, vertex_of(s, b)?);
    s.find_edge(a, b).map(|x| x.0).ok_or_else(|| err(format!("no edge {}-{}", s.name(a), s.name(b))))
}

fn triangle_of(s: &SimplicialSurface, [a, b, c]: &[String; 3]) -> Result<usize> {
    let (a, b, c) = (vertex_of(s, a)?, vertex_of(s, b)?, vertex_of(s, c)?);
    s.find_triangle(a, b, c).map(|x| x.0).ok_or_else(|| err("unknown triangle"))
}

fn edge_names(s: &SimplicialSurface, e: usize) -> [String; 2] {
    s.edge(e).map(|v| s.name(v).to_string())
}

fn triangle_names(s: &SimplicialSurface, t: usize) -> [String; 3] {
    s.triangle(t).map(|v| s.name(v).to_string())
}

fn simplex_names(s: &SimplicialSurface, x: Simplex) -> Vec<String> {
    match x {
        Simplex::V(v) => vec![s.name(v).to_string()],
        Simplex::E(e) => edge_names(s, e).to_vec(),
        Simplex::T(t) => triangle_names(s, t).to_vec(),
    }
}

fn simplex_of(s: &SimplicialSurface, names: &[String]) -> Result<Simplex> {
    match names {
        [a] => Ok(Simplex::V(vertex_of(s, a)?)),
        [a, b] => Ok(Simplex::E(edge_of(s, &[a.clone(), b.clone()])?)),
        [a, b, c] => Ok(Simplex::T(triangle_of(s, &[a.clone(), b.clone(), c.clone()])?)),
        _ => Err(err("a simplex has one to three vertices")),
    }
}

pub fn cover_doc(c: &Cover, base: &str) -> CoverDoc {
    let s = c.base();
    let indices = (0..c.len())
        .map(|i| IndexDoc {
            label: c.label(i).clone(),
            support: c.support(i).maximal(s).into_iter().map(|x| simplex_names(s, x)).collect(),
        })
        .collect();
    CoverDoc { base: base.to_string(), indices }
}

fn label_index(c: &Cover, l: &Label) -> Result<usize> {
    c.find_label(l).ok_or_else(|| err(format!("unknown index {l:?}")))
}

/// Resolves the ids of a scenario into library objects, memoizing each.
pub struct Loader<'a> {
    doc: &'a Scenario,
    surfaces: HashMap<String, Arc<SimplicialSurface>>,
    maps: HashMap<String, SimplicialMap>,
    covers: HashMap<String, Arc<Cover>>,
    gerbes: HashMap<String, Arc<BundleGerbe>>,
    morphisms: HashMap<String, Arc<OneMorphism>>,
    active: Vec<String>,
}

impl<'a> Loader<'a> {
    pub fn new(doc: &'a Scenario) -> Self {
        Loader {
            doc,
            surfaces: HashMap::default(),
            maps: HashMap::default(),
            covers: HashMap::default(),
            gerbes: HashMap::default(),
            morphisms: HashMap::default(),
            active: Vec::new(),
        }
    }

    pub fn doc(&self) -> &Scenario {
        self.doc
    }

    fn enter(&mut self, key: String) -> Result<()> {
        if self.active.contains(&key) {
            return Err(err(format!("cyclic reference through {key}")));
        }
        self.active.push(key);
        Ok(())
    }

    pub fn surface(&mut self, id: &str) -> Result<Arc<SimplicialSurface>> {
        if let Some(s) = self.surfaces.get(id) {
            return Ok(s.clone());
        }
        let d = self.doc.surface.get(id).ok_or_else(|| err(format!("unknown surface {id}")))?;
        let s = Arc::new(load_surface(d)?);
        self.surfaces.insert(id.to_string(), s.clone());
        Ok(s)
    }

    pub fn map(&mut self, id: &str) -> Result<SimplicialMap> {
        if let Some(m) = self.maps.get(id) {
            return Ok(m.clone());
        }
        let d = self.doc.map.get(id).ok_or_else(|| err(format!("unknown map {id}")))?;
        let (src, tgt) = (self.surface(&d.source)?, self.surface(&d.target)?);
        let vmap = (0..src.n_vertices())
            .map(|v| {
                let to = d.vertices.get(src.name(v)).ok_or_else(|| err(format!("map {id} misses {}", src.name(v))))?;
                vertex_of(&tgt, to)
            })
            .collect::<Result<Vec<_>>>()?;
        let m = SimplicialMap::new(src, tgt, vmap)?;
        self.maps.insert(id.to_string(), m.clone());
        Ok(m)
    }

    pub fn involution(&mut self, id: &str) -> Result<Involution> {
        Involution::new(self.map(id)?)
    }

    fn load_cover(&mut self, d: &CoverDoc) -> Result<Cover> {
        let base = self.surface(&d.base)?;
        let mut labels = Vec::new();
        let mut supports = Vec::new();
        for ix in &d.indices {
            let simplices = ix.support.iter().map(|n| simplex_of(&base, n)).collect::<Result<Vec<_>>>()?;
            labels.push(ix.label.clone());
            supports.push(Support::closure(&base, &simplices));
        }
        let mut seen = std::collections::BTreeSet::new();
        if !labels.iter().all(|l| seen.insert(l)) {
            return Err(err("duplicate index label"));
        }
        Ok(Cover::unchecked(base, labels, supports))
    }

    pub fn cover(&mut self, id: &str) -> Result<Arc<Cover>> {
        if let Some(c) = self.covers.get(id) {
            return Ok(c.clone());
        }
        let d = self.doc.cover.get(id).ok_or_else(|| err(format!("unknown cover {id}")))?;
        let c = Arc::new(self.load_cover(d)?);
        self.covers.insert(id.to_string(), c.clone());
        Ok(c)
    }

    pub fn gerbe(&mut self, id: &str) -> Result<Arc<BundleGerbe>> {
        if let Some(g) = self.gerbes.get(id) {
            return Ok(g.clone());
        }
        let d = self.doc.gerbe.get(id).ok_or_else(|| err(format!("unknown gerbe {id}")))?;
        self.enter(format!("gerbe {id}"))?;
        let g = match d {
            GerbeDoc::Explicit { cover, c, l, l_curv, mu } => {
                let cov = self.cover(cover)?;
                let s = cov.base().clone();
                let ix = |l: &Label| label_index(&cov, l);
                let cm: CMap = c.iter().map(|e| Ok(((ix(&e.index)?, triangle_of(&s, &e.triangle)?), e.value))).collect::<Result<_>>()?;
                let um: UMap = l
                    .iter()
                    .map(|e| Ok(((ix(&e.i)?, ix(&e.j)?, edge_of(&s, &e.edge)?), from_complex(e.transport))))
                    .collect::<Result<_>>()?;
                let mm: MuMap = mu
                    .iter()
                    .map(|e| Ok(((vertex_of(&s, &e.vertex)?, ix(&e.i)?, ix(&e.j)?, ix(&e.k)?), from_complex(e.value))))
                    .collect::<Result<_>>()?;
                if l_curv.is_empty() {
                    BundleGerbe::from_parts(cov, cm, um, mm)
                } else {
                    let lc = l_curv
                        .iter()
                        .map(|e| Ok(((ix(&e.i)?, ix(&e.j)?, triangle_of(&s, &e.triangle)?), e.value)))
                        .collect::<Result<_>>()?;
                    BundleGerbe::from_raw(cov, cm, um, lc, mm)
                }
            }
            GerbeDoc::Trivial { base, rho } => {
                let s = self.surface(base)?;
                if rho.len() != s.n_triangles() {
                    return Err(err(format!("gerbe {id}: rho needs one value per triangle")));
                }
                BundleGerbe::trivial(s, rho)
            }
            GerbeDoc::Dual { of } => self.gerbe(of)?.dual(),
            GerbeDoc::Pullback { of, along } => {
                let f = self.map(along)?;
                self.gerbe(of)?.pullback(&f)?
            }
            GerbeDoc::Tensor { factors: [a, b] } => {
                let (a, b) = (self.gerbe(a)?, self.gerbe(b)?);
                a.tensor(&b)?
            }
        };
        self.active.pop();
        let g = Arc::new(g);
        self.gerbes.insert(id.to_string(), g.clone());
        Ok(g)
    }

    fn atomic(&mut self, d: &AtomicDoc) -> Result<Atomic> {
        let (source, target) = (self.gerbe(&d.source)?, self.gerbe(&d.target)?);
        let z = Arc::new(self.load_cover(&d.refinement)?);
        let base = z.base().clone();
        if *base != **source.base() || *base != **target.base() {
            return Err(GerbeError::BaseMismatch);
        }
        if d.s.len() != z.len() || d.t.len() != z.len() {
            return Err(err("one leg label per refinement index"));
        }
        let s = d.s.iter().map(|l| label_index(source.cover(), l)).collect::<Result<Vec<_>>>()?;
        let t = d.t.iter().map(|l| label_index(target.cover(), l)).collect::<Result<Vec<_>>>()?;
        let mut transport = vec![vec![None; base.n_edges()]; z.len()];
        for e in &d.transport {
            transport[label_index(&z, &e.index)?][edge_of(&base, &e.edge)?] = Some(from_matrix(&e.matrix)?);
        }
        let mut tc = vec![vec![None; base.n_triangles()]; z.len()];
        for e in &d.trace_curv {
            tc[label_index(&z, &e.index)?][triangle_of(&base, &e.triangle)?] = Some(e.value);
        }
        let bundle = DiscreteBundle::from_parts(z.clone(), d.rank, transport, tc);
        let mut alpha = AlphaTable::default();
        for e in &d.alpha {
            let key = (vertex_of(&base, &e.vertex)?, label_index(&z, &e.k)?, label_index(&z, &e.kp)?);
            alpha.insert(key, from_matrix(&e.matrix)?);
        }
        Ok(Atomic { source, target, z, s, t, bundle, alpha })
    }

    pub fn morphism(&mut self, id: &str) -> Result<Arc<OneMorphism>> {
        if let Some(m) = self.morphisms.get(id) {
            return Ok(m.clone());
        }
        let d = self.doc.morphisms.get(id).ok_or_else(|| err(format!("unknown morphism {id}")))?;
        self.enter(format!("morphism {id}"))?;
        let m = match d {
            MorphismDoc::Chain { factors } => {
                let fs = factors.iter().map(|f| self.atomic(f).map(Arc::new)).collect::<Result<Vec<_>>>()?;
                OneMorphism::from_chain(fs)?
            }
            MorphismDoc::Identity { gerbe } => identity_1(&self.gerbe(gerbe)?),
            MorphismDoc::Compose { outer, inner } => {
                let (o, i) = (self.morphism(outer)?, self.morphism(inner)?);
                compose_1(&o, &i)?
            }
            MorphismDoc::Dual { of } => dual_1(&*self.morphism(of)?),
            MorphismDoc::Inverse { of } => inverse_1(&*self.morphism(of)?)?,
            MorphismDoc::Pullback { of, along } => {
                let f = self.map(along)?;
                pullback_1(&*self.morphism(of)?, &f)?
            }
        };
        self.active.pop();
        let m = Arc::new(m);
        self.morphisms.insert(id.to_string(), m.clone());
        Ok(m)
    }

    pub fn two(&mut self, d: &TwoDoc) -> Result<TwoMorphism> {
        let (a1, a2) = (self.morphism(&d.source)?, self.morphism(&d.target)?);
        let base = a1.cover().base().clone();
        let canon: Canon = d
            .values
            .iter()
            .map(|e| {
                let key = (vertex_of(&base, &e.vertex)?, label_index(a1.cover(), &e.z1)?, label_index(a2.cover(), &e.z2)?);
                Ok((key, from_matrix(&e.matrix)?))
            })
            .collect::<Result<_>>()?;
        Ok(TwoMorphism::from_canonical(a1, a2, canon))
    }

    pub fn jandl(&mut self) -> Result<Option<(Arc<BundleGerbe>, JandlStructure)>> {
        let Some(d) = &self.doc.jandl else { return Ok(None) };
        let g = self.gerbe(&d.gerbe)?;
        let k = self.involution(&d.involution)?;
        let a = self.morphism(&d.a)?;
        let phi = self.two(&d.phi)?;
        Ok(Some((g, JandlStructure { k, a, phi })))
    }

    pub fn brane(&mut self) -> Result<Option<(Arc<BundleGerbe>, DBrane)>> {
        let Some(d) = &self.doc.brane else { return Ok(None) };
        let g = self.gerbe(&d.gerbe)?;
        let inclusion = self.map(&d.inclusion)?;
        let module = self.morphism(&d.module)?;
        Ok(Some((g.clone(), DBrane::new(&g, inclusion, module)?)))
    }
}

/// Builds a scenario from library objects, naming every object it meets.
#[derive(Default)]
pub struct Writer {
    pub doc: Scenario,
    surfaces: Vec<(Arc<SimplicialSurface>, String)>,
    gerbes: Vec<(Arc<BundleGerbe>, String)>,
    morphisms: Vec<(Arc<OneMorphism>, String)>,
}

fn fresh<T>(taken: &BTreeMap<String, T>, stem: &str) -> String {
    if !taken.contains_key(stem) {
        return stem.to_string();
    }
    (1..).map(|i| format!("{stem}{i}")).find(|n| !taken.contains_key(n)).unwrap()
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn surface(&mut self, s: &Arc<SimplicialSurface>, name: &str) -> String {
        if let Some((_, id)) = self.surfaces.iter().find(|(x, _)| Arc::ptr_eq(x, s) || **x == **s) {
            return id.clone();
        }
        let id = fresh(&self.doc.surface, name);
        self.doc.surface.insert(id.clone(), surface_doc(s));
        self.surfaces.push((s.clone(), id.clone()));
        id
    }

    pub fn map(&mut self, f: &SimplicialMap, name: &str) -> String {
        let source = self.surface(&f.source, "surface");
        let target = self.surface(&f.target, "surface");
        let vertices = (0..f.source.n_vertices())
            .map(|v| (f.source.name(v).to_string(), f.target.name(f.vertex(v)).to_string()))
            .collect();
        let id = fresh(&self.doc.map, name);
        self.doc.map.insert(id.clone(), MapDoc { source, target, vertices });
        id
    }

    pub fn gerbe(&mut self, g: &Arc<BundleGerbe>, name: &str) -> String {
        if let Some((_, id)) = self.gerbes.iter().find(|(x, _)| Arc::ptr_eq(x, g) || **x == **g) {
            return id.clone();
        }
        let base = self.surface(g.base(), "surface");
        let s = g.base().clone();
        let trivial = g.trivial_rho().filter(|rho| BundleGerbe::trivial(s.clone(), rho) == **g);
        let d = match trivial {
            Some(rho) => GerbeDoc::Trivial { base, rho },
            None => {
                let cov = g.cover();
                let cover = fresh(&self.doc.cover, &format!("{name}.cover"));
                self.doc.cover.insert(cover.clone(), cover_doc(cov, &base));
                let l = |i: usize| cov.label(i).clone();
                let c = g.c_map().iter().map(|(&(i, t), &value)| CEntry { index: l(i), triangle: triangle_names(&s, t), value }).collect();
                let lm = g
                    .u_map()
                    .iter()
                    .map(|(&(i, j, e), &z)| LEntry { i: l(i), j: l(j), edge: edge_names(&s, e), transport: complex(z) })
                    .collect();
                let l_curv = g
                    .l_curv_map()
                    .iter()
                    .map(|(&(i, j, t), &value)| LCurvEntry { i: l(i), j: l(j), triangle: triangle_names(&s, t), value })
                    .collect();
                let mu = g
                    .mu_map()
                    .iter()
                    .map(|(&(v, i, j, k), &z)| MuEntry {
                        vertex: s.name(v).to_string(),
                        i: l(i),
                        j: l(j),
                        k: l(k),
                        value: complex(z),
                    })
                    .collect();
                GerbeDoc::Explicit { cover, c, l: lm, l_curv, mu }
            }
        };
        let id = fresh(&self.doc.gerbe, name);
        self.doc.gerbe.insert(id.clone(), d);
        self.gerbes.push((g.clone(), id.clone()));
        id
    }

    fn atomic(&mut self, a: &Atomic) -> AtomicDoc {
        let source = self.gerbe(&a.source, "gerbe");
        let target = self.gerbe(&a.target, "gerbe");
        let base_id = self.surface(a.z.base(), "surface");
        let s = a.z.base().clone();
        let z = &a.z;
        let mut transport = Vec::new();
        let mut trace_curv = Vec::new();
        for k in 0..z.len() {
            for (e, m) in a.bundle.transports()[k].iter().enumerate() {
                if let Some(m) = m {
                    transport.push(TransportEntry { index: z.label(k).clone(), edge: edge_names(&s, e), matrix: matrix(m) });
                }
            }
            for (t, x) in a.bundle.trace_curvatures()[k].iter().enumerate() {
                if let Some(x) = x {
                    trace_curv.push(CurvEntry { index: z.label(k).clone(), triangle: triangle_names(&s, t), value: *x });
                }
            }
        }
        let mut keys: Vec<_> = a.alpha.keys().copied().collect();
        keys.sort();
        let alpha = keys
            .into_iter()
            .map(|(v, k, kp)| AlphaEntry {
                vertex: s.name(v).to_string(),
                k: z.label(k).clone(),
                kp: z.label(kp).clone(),
                matrix: matrix(&a.alpha[&(v, k, kp)]),
            })
            .collect();
        AtomicDoc {
            source,
            target,
            refinement: cover_doc(z, &base_id),
            s: a.s.iter().map(|&i| a.source.cover().label(i).clone()).collect(),
            t: a.t.iter().map(|&i| a.target.cover().label(i).clone()).collect(),
            rank: a.bundle.rank(),
            transport,
            trace_curv,
            alpha,
        }
    }

    pub fn morphism(&mut self, a: &Arc<OneMorphism>, name: &str) -> String {
        if let Some((_, id)) = self.morphisms.iter().find(|(x, _)| Arc::ptr_eq(x, a) || **x == **a) {
            return id.clone();
        }
        let factors = a.factors().iter().map(|f| self.atomic(f)).collect();
        let id = fresh(&self.doc.morphisms, name);
        self.doc.morphisms.insert(id.clone(), MorphismDoc::Chain { factors });
        self.morphisms.push((a.clone(), id.clone()));
        id
    }

    pub fn two(&mut self, b: &TwoMorphism, source: &str, target: &str) -> TwoDoc {
        let source = self.morphism(b.source(), source);
        let target = self.morphism(b.target(), target);
        let (z1, z2) = (b.source().cover(), b.target().cover());
        let s = z1.base();
        let values = b
            .canon()
            .iter()
            .map(|(&(v, k1, k2), m)| TwoEntry {
                vertex: s.name(v).to_string(),
                z1: z1.label(k1).clone(),
                z2: z2.label(k2).clone(),
                matrix: matrix(m),
            })
            .collect();
        TwoDoc { source, target, values }
    }

    pub fn jandl(&mut self, g: &Arc<BundleGerbe>, j: &JandlStructure) {
        let gerbe = self.gerbe(g, "G");
        let involution = self.map(j.k.map(), "involution");
        let a = self.morphism(&j.a, "A");
        let phi = self.two(&j.phi, "kA", "A*");
        self.doc.jandl = Some(JandlDoc { gerbe, involution, a, phi });
    }

    pub fn brane(&mut self, g: &Arc<BundleGerbe>, b: &DBrane) {
        let gerbe = self.gerbe(g, "G");
        self.surface(&b.q, "brane");
        let inclusion = self.map(&b.inclusion, "inclusion");
        let module = self.morphism(&b.module, "E");
        self.doc.brane = Some(BraneDoc { gerbe, inclusion, module });
    }
}

pub fn to_json(doc: &Scenario) -> String {
    serde_json::to_string_pretty(doc).expect("scenario serializes")
}

pub fn from_json(s: &str) -> Result<Scenario> {
    serde_json::from_str(s).map_err(|e| err(format!("parse: {e}")))
}
