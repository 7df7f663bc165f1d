pub mod error;
pub mod fock;
pub mod gaussian;
pub mod hermite;
pub mod linalg;
pub mod positivity;
pub mod reconstruction;
pub mod tomogram;
