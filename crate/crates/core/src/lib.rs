pub mod banana;
pub mod certificate;
pub mod circuit;
pub mod critical;
pub mod decompose;
pub mod error;
pub mod geom;
pub mod json;
pub mod linalg;
pub mod lp;
pub mod mediated;
pub mod poly;
pub mod rational;
pub mod verify;
