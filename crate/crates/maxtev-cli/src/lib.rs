//! Command-line front end for the transmission-eigenvalue solver:
//! configuration handling and the command implementations behind the
//! `maxtev` binary.

pub mod commands;
pub mod config;
