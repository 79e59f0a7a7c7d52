pub mod bsd;
pub mod chars;
pub mod cyclo;
pub mod equidist;
pub mod error;
pub mod ffield;
pub mod level;
pub mod lfun;
pub mod numeric;
pub mod oracle;
pub mod orbits;
pub mod report;

pub use error::{Error, Result};
pub use lfun::IntPoly;
