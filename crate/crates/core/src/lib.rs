//! Streaming RDF toolkit organised around the RDF stream type taxonomy.

pub mod annotator;
pub mod classifier;
pub mod cli;
pub mod converter;
pub mod io;
pub mod model;
pub mod taxonomy;
