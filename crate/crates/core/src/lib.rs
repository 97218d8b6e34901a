//! Real stabilizer circuits: exact semantics, Pauli tableaux, the unique
//! normal form with its synthesis, a terminating rewrite normalizer, and
//! brute-force counting.

pub mod circuit;
pub mod counting;
pub mod exact;
pub mod normal_form;
pub mod pauli;
pub mod rewrite;
pub mod tableau;

pub use circuit::{Circuit, Gate, GenKind, Generator, TypedCircuit, WireColor};
pub use exact::{ExactMatrix, RootTwo};
pub use normal_form::NormalForm;
pub use pauli::{PauliLetter, PauliOperator, Sign};
pub use tableau::{fingerprint, OperatorFingerprint, Tableau};
