//! Finite monoids and their acts: tensor products, the flatness hierarchy,
//! classes of monomorphisms, pushouts, bounded cellular closure and a
//! census of small monoids, together with the verification sweeps that
//! exercise them.

pub mod act;
pub mod census;
pub mod classes;
pub mod closure;
pub mod colimit;
pub mod congruence;
pub mod enumerate;
pub mod error;
pub mod flatness;
pub mod homs;
pub mod json;
pub mod monoid;
pub mod random;
pub mod morphism;
pub mod tensor;
pub mod verify;

pub use act::{disjoint_union, Act, Side, Subact};
pub use congruence::{congruence_generated, quotient, rees_congruence, rees_quotient, Congruence};
pub use error::{Error, Result};
pub use monoid::{validate_monoid, Monoid};
pub use morphism::ActMorphism;
pub use tensor::{tensor, tensor_map, TensorProduct};
