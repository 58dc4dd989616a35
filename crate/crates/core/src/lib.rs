//! Constructions and exact verification for locally testable codes at desk
//! scale: codes over prime-field alphabets, non-adaptive testers, code
//! concatenation, separable testers and alphabet-reduction pipelines.

pub mod algebra;
pub mod code;
pub mod concat;
pub mod error;
pub mod genconstruct;
pub mod io;
pub mod pipeline;
pub mod rate;
pub mod rational;
pub mod separability;
pub mod soundness;
pub mod tester;
pub mod verify;

pub use code::{Alphabet, Code, Symbol, Word};
pub use error::{Budget, Error, Result};
pub use rate::Rate;
pub use rational::{Extended, Rational};
pub use tester::{Check, Tester};
