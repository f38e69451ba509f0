//! Catalog-driven translation of natural-language observability questions
//! into PromQL.

pub mod catalog;
pub mod clock;
pub mod config;
pub mod discovery;
pub mod error;
pub mod generator;
pub mod prom;
pub mod intent;
pub mod selector;
pub mod service;
pub mod startup;
pub mod temporal;
pub mod text;
pub mod validation;
