//! Finite metric measure spaces: representation, normal forms, semigroup
//! operations and distance matrix measures.

pub mod canon;
pub mod dmm;
pub mod io;
pub mod monomial;
pub mod ops;
pub mod orthant;
pub mod scalar;
pub mod space;

pub use canon::{canonicalize, canonicalize_with_map, is_equivalent, structure_key, Isomorphism};
pub use dmm::{distance_matrix_measure, pair_functional, DiscreteMatrixMeasure, DEFAULT_ENUM_LIMIT};
pub use monomial::{eval_monomial, EvalMode, Kernel, Monomial, MonomialValue};
pub use io::{raw_from_json, read_raw, read_space, space_from_json, space_to_json, write_space, RawSpace};
pub use ops::{box_plus, concat_h, scalar_action, ActionKind, LpExponent};
pub use orthant::{eval_block_orthant, eval_upper_orthant, BlockPattern};
pub use scalar::{Mode, Scalar};
pub use space::{validate, FiniteMmSpace, ValidationReport, Violation};
