pub mod constructions;
pub mod error;
pub mod exact_torus;
pub mod induced;
pub mod par;
pub mod partition;
pub mod rules;
pub mod trajectory;
pub mod window;

pub use error::{Error, Result};
