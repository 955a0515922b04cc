//! Command-line surface, configuration and bit-exact file formats for the
//! legal-entity knowledge-base pipeline. The `lekb` binary is a thin wrapper
//! around [`args`] and [`commands`].

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
