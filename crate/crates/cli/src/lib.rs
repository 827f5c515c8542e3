//! `slaiot` command-line tool and the local HTTP service behind the wizard.
//!
//! Both front ends go through [`engine`], so a command and its `/api`
//! counterpart produce the same bytes.

pub mod api;
pub mod cli;
pub mod engine;

pub use cli::{run, Cli, Command};
pub use engine::ExitStatus;
