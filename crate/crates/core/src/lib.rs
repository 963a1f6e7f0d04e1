//! Exact-arithmetic toolkit for ideals on ω, submeasures, and the measure
//! sequences that witness the Josefson–Nissenzweig property on spaces of the
//! form N_F.

pub mod acceptance;
pub mod bjn;
pub mod citation;
pub mod config;
pub mod construction;
pub mod error;
pub mod ideal;
pub mod lp;
pub mod measure;
pub mod omega;
pub mod rational;
pub mod reduction;
pub mod scalar;
pub mod submeasure;

pub use error::{Error, Result};
pub use measure::{FinMeasure, Point};
pub use omega::OmegaSet;
pub use rational::Q;
