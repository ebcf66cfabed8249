pub mod cli;
pub mod enumerate;
pub mod flatperm;
pub mod io;
pub mod error;
pub mod lattice;
pub mod legendre;
pub mod phase;
pub mod thermo;
