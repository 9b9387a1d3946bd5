//! Constrained combinatorial interaction testing.
//!
//! Generates t-wise covering test suites with IPOG while deciding the
//! validity of partial test cases through binary decision diagrams.

pub mod bdd;
pub mod encode;
pub mod ipog;
pub mod model;
pub mod validity;

pub use bdd::{BddError, BddManager, BinOp, Limits, NodeRef};
pub use encode::{
    compile, constrained_params, order_parameters, CompiledConstraints, EncodeError, Encoding, EncodingMode,
    ParamOrdering,
};
pub use ipog::{generate, verify, GenerateError, GenerateOptions, TestSuite, VerifyReport};
pub use model::{
    eval_constraints, parse_model, Assignment, CmpOp, ConstraintExpr, ModelError, Parameter, Relation, SutModel,
};
pub use validity::{
    build_handler, check_and, oracle_check, HandlerKind, HandlerOptions, PartialValidityBdd, QuantOrder,
    ValidityHandler,
};
