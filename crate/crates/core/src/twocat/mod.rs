//! The strict 2-category of bundle gerbes: 1-morphisms, 2-morphisms, their
//! compositions, units, inverses, duals, tensor products and pullbacks.

mod one;
mod two;

pub use one::{
    alpha_deviation, atomic_checked, compose_1, dual_1, identity_1, inverse_1, pullback_1, tensor_1, tensor_1_pairs,
    AlphaTable, Atomic, OneMorphism,
};
pub use two::{
    dual_2, equivalent_2, horizontal, identity_2, inverse_2, invert_1, left_unitor, mate, product_keys, pullback_2,
    right_unitor, tensor_2, vertical, Canon, Inverse, TwoMorphism, TwoMorphismRep,
};

#[cfg(test)]
mod tests;
