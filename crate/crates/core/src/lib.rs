pub mod bench;
pub mod cli;
pub mod coordsys;
pub mod error;
pub mod grid;
pub mod lemma_lab;
pub mod linprop;
pub mod nlsolve;
pub mod numerics;
pub mod toys;
pub mod weights;

pub use error::{LabError, Result};
