//! Generators, vector fields and their flows on `ℝ²ⁿ` and `Hₙ`.

pub mod expr;
pub mod flow;
pub mod jet;
pub mod translate;
pub mod vector;

pub use expr::{parse_field, Coords, Expr, Printer, ScalarFieldSpec};
pub use flow::{flow, flow_jacobian, Composition, Diffeo, FlowMap, IdentityMap, DEFAULT_STEP};
pub use translate::{
    check_structure, contact_residual, symplectic_residual, translation_contacto, translation_symplecto,
    truncated_dilation, ContactBoxes, ContactPlan, PointCheck, StructureKind, StructureReport,
};
pub use vector::{contact_field, explicit_field, hamiltonian_field, FieldKind, VectorFieldSpec, MAX_DIM};
