//! Command-line entry points and the HTTP session service.

pub mod cmd;
pub mod service;
pub mod session;

pub use service::{router, AppState};
