//! HTTP API and command-line front end for the causal explanation engine.
//! Both share one request layer ([`ops`]) and one JSON renderer
//! ([`render::json`]), so equal requests produce equal bytes.

#![recursion_limit = "256"]

pub mod cli;
pub mod error;
pub mod http;
pub mod openapi;
pub mod ops;
pub mod render;
pub mod session;

pub use error::{Result, ServiceError};
pub use session::{Bundle, Session, SessionConfig};
