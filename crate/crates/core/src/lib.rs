pub mod accountant;
pub mod budget;
pub mod cli;
pub mod config;
pub mod error;
pub mod gaussian;
pub mod lap2;
pub mod numerics;
pub mod profile;
pub mod optimizer;
pub mod oracle;
pub mod verify;
