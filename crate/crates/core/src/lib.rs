//! Balance analysis for pure states of `q` qudits with equal local
//! dimension `d`.
//!
//! A state's support in a product basis is *balanced* when positive integer
//! weights make every symbol appear with the same weighted count on every
//! site; such supports carry maximally entangled states and survive
//! determinant-one local filtering. This crate classifies supports
//! (product / unbalanced / partly balanced / reducibly balanced /
//! irreducibly balanced) with exact rational arithmetic, constructs the
//! associated maximally entangled states, runs the iterative filtering
//! normal form with null-cone detection, evaluates the closed-form
//! SL-invariant measures, and enumerates supports exhaustively at desk
//! scale.
//!
//! The serialized interfaces (state documents, classification reports,
//! catalog lines) are documented in the repository README.

pub mod balance;
pub mod catalog;
pub mod error;
pub mod filtering;
pub mod linalg;
pub mod measures;
pub mod rng;
pub mod state;
pub mod verify;

pub use balance::{
    b_matrix, balanced_part, classify, compose_alternating, construct_max_entangled,
    decompose_balanced, find_certificate, is_irreducible, verify_roots_of_unity, AlternatingMatrix,
    BMatrix, BalanceCertificate, BalanceDecomposition, Classification,
};
pub use catalog::{
    canonicalize, enumerate_b_matrices, enumerate_irreducible, verify_length_bound,
    CanonicalBMatrix, CatalogEntry, LengthBoundReport,
};
pub use error::{Error, Result};
pub use filtering::{
    compose_filters, equalize_amplitudes, normal_form, EqualizeOutcome, LocalFilter,
    NormalFormOutcome, DEFAULT_MAX_SWEEPS, DEFAULT_NF_TOL, DEFAULT_NULL_TOL,
};
pub use linalg::{CMatrix, C64};
pub use measures::{applicable_measures, concurrence2, three_tangle, two_qudit_det, MeasureValue};
pub use state::{LocalDensityMatrix, PureState, QuditSystem, Term, DEFAULT_TOL};
pub use verify::{verify_claim, VerifyReport};
