//! `validate` and `holonomy` on loaded scenarios.

use super::scenario::{complex, Complex, Loader, Mode, Scenario};
use crate::error::{GerbeError, Result};
use crate::gerbe::BundleGerbe;
use crate::holonomy::{
    holonomy_closed_along, holonomy_dbrane, holonomy_unoriented, integrate, jandl_validate, trivialize,
};
use crate::linalg::{tolerance, C64};
use crate::report::Report;
use crate::surface::{fundamental_domain, orientation_cover, SimplicialMap};
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Serialize)]
pub struct Validation {
    pub ok: bool,
    pub tolerance: f64,
    pub sections: BTreeMap<String, Report>,
    pub errors: Vec<String>,
}

/// Loads and validates every gerbe, morphism, map, Jandl structure and brane.
pub fn cmd_validate(doc: &Scenario) -> Validation {
    let mut ld = Loader::new(doc);
    let mut sections = BTreeMap::new();
    let mut errors = Vec::new();
    for id in doc.map.keys() {
        if let Err(e) = ld.map(id) {
            errors.push(format!("map {id}: {e}"));
        }
    }
    for id in doc.gerbe.keys() {
        match ld.gerbe(id) {
            Ok(g) => {
                let mut r = g.validate();
                r.merge(g.validate_t_mu());
                sections.insert(format!("gerbe {id}"), r);
            }
            Err(e) => errors.push(format!("gerbe {id}: {e}")),
        }
    }
    for id in doc.morphisms.keys() {
        match ld.morphism(id) {
            Ok(a) => {
                sections.insert(format!("morphism {id}"), a.validate(true));
            }
            Err(e) => errors.push(format!("morphism {id}: {e}")),
        }
    }
    match ld.jandl() {
        Ok(Some((g, j))) => {
            sections.insert("jandl".into(), jandl_validate(&g, &j));
        }
        Ok(None) => {}
        Err(e) => errors.push(format!("jandl: {e}")),
    }
    match ld.brane() {
        Ok(Some((_, b))) => {
            sections.insert("brane".into(), b.module.validate(false));
        }
        Ok(None) => {}
        Err(e) => errors.push(format!("brane: {e}")),
    }
    let ok = errors.is_empty() && sections.values().all(Report::is_ok);
    Validation { ok, tolerance: tolerance(), sections, errors }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrivializationInfo {
    pub seed: u64,
    pub cover_indices: usize,
    /// `Σ ρ` over the worldsheet (closed, D-brane) or the fundamental domain.
    pub rho_sum: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Independence {
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_seed: Option<u64>,
    pub value: Complex,
    pub deviation: f64,
    pub tolerance: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct HolonomyRecord {
    pub mode: Mode,
    pub value: Complex,
    pub modulus: f64,
    pub phase: f64,
    pub trivialization: TrivializationInfo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub independence: Option<Independence>,
}

fn scenario_err(msg: &str) -> GerbeError {
    GerbeError::Scenario(msg.into())
}

/// The mode named in the scenario, else inferred from its sections.
pub fn default_mode(doc: &Scenario) -> Mode {
    match doc.holonomy.as_ref().and_then(|h| h.mode) {
        Some(m) => m,
        None if doc.jandl.is_some() => Mode::Unoriented,
        None if doc.brane.is_some() => Mode::Dbrane,
        None => Mode::Closed,
    }
}

fn pulled(g: &Arc<BundleGerbe>, phi: &SimplicialMap) -> Result<Arc<BundleGerbe>> {
    if phi.is_identity() {
        Ok(g.clone())
    } else {
        Ok(Arc::new(g.pullback(phi)?))
    }
}

pub fn cmd_holonomy(doc: &Scenario, mode: Option<Mode>, seed: u64, check: bool) -> Result<HolonomyRecord> {
    let h = doc.holonomy.as_ref().ok_or_else(|| scenario_err("missing holonomy section"))?;
    let mode = mode.unwrap_or_else(|| default_mode(doc));
    let mut ld = Loader::new(doc);
    let g = ld.gerbe(&h.gerbe)?;
    let phi = match &h.worldsheet {
        Some(id) => ld.map(id)?,
        None => SimplicialMap::identity(g.base().clone()),
    };
    let eps = tolerance();
    let (eval, info): (Box<dyn Fn(u64, u64) -> Result<C64>>, _) = match mode {
        Mode::Closed => {
            let pg = pulled(&g, &phi)?;
            let t = trivialize(&pg, seed)?;
            let info = TrivializationInfo { seed, cover_indices: g.cover().len(), rho_sum: integrate(pg.base(), &t.rho)? };
            let g = g.clone();
            (Box::new(move |s, _| holonomy_closed_along(&g, &phi, s)), info)
        }
        Mode::Dbrane => {
            let (_, brane) = ld.brane()?.ok_or_else(|| scenario_err("missing brane section"))?;
            let pg = pulled(&g, &phi)?;
            let t = trivialize(&pg, seed)?;
            let info = TrivializationInfo { seed, cover_indices: g.cover().len(), rho_sum: integrate(pg.base(), &t.rho)? };
            let g = g.clone();
            (Box::new(move |s, _| holonomy_dbrane(&g, &brane, &phi, s)), info)
        }
        Mode::Unoriented => {
            let (jg, j) = ld.jandl()?.ok_or_else(|| scenario_err("missing jandl section"))?;
            if *jg != *g {
                return Err(scenario_err("jandl structure lives on another gerbe"));
            }
            let base_id = h.base.as_ref().ok_or_else(|| scenario_err("unoriented mode needs holonomy.base"))?;
            let oc = orientation_cover(ld.surface(base_id)?)?;
            let f = fundamental_domain(&oc, h.domain_seed);
            let t = trivialize(&g, seed)?;
            let rho_sum = f.triangles(&oc).iter().map(|&x| t.rho[x]).sum();
            let info = TrivializationInfo { seed, cover_indices: g.cover().len(), rho_sum };
            let g = g.clone();
            (
                Box::new(move |s, ds| {
                    let f = fundamental_domain(&oc, ds);
                    holonomy_unoriented(&g, &j, &oc, &f, s)
                }),
                info,
            )
        }
    };
    let value = eval(seed, h.domain_seed)?;
    let independence = if check {
        let (s2, d2) = (seed.wrapping_add(1), h.domain_seed.wrapping_add(1));
        let v2 = eval(s2, d2)?;
        let deviation = (v2 - value).norm();
        Some(Independence {
            seed: s2,
            domain_seed: (mode == Mode::Unoriented).then_some(d2),
            value: complex(v2),
            deviation,
            tolerance: eps,
            ok: deviation <= eps,
        })
    } else {
        None
    };
    Ok(HolonomyRecord {
        mode,
        value: complex(value),
        modulus: value.norm(),
        phase: value.arg(),
        trivialization: info,
        domain_seed: (mode == Mode::Unoriented).then_some(h.domain_seed),
        independence,
    })
}
