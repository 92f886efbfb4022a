//! JSON instance files, random instance generation, the property suite and
//! the command-line front end for `nclp-core`.

pub mod acceptance;
pub mod cli;
pub mod generate;
pub mod instance;
pub mod suite;
