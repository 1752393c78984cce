//! Bundle gerbes with connection on finite simplicial surfaces, their strict
//! 2-category of 1-morphisms and 2-morphisms, and surface holonomies for
//! closed, brane-bounded and unoriented surfaces.

pub mod bundle;
pub mod cli;
pub mod error;
pub mod gerbe;
pub mod holonomy;
pub mod linalg;
pub mod normalize;
pub mod random;
pub mod report;
pub mod site;
pub mod surface;
pub mod twocat;

pub use error::{GerbeError, Result};

/// Hash map on small integer keys.
pub type HashMap<K, V> = rustc_hash::FxHashMap<K, V>;
