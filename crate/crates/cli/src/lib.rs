//! Front ends for the catalogql engine: an HTTP transport for live
//! Prometheus, the JSON-RPC server and the command line settings.

pub mod http;
pub mod render;
pub mod server;
pub mod settings;
