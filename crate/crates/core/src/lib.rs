pub mod inference;
pub mod ingest;
pub mod model;
pub mod simulate;
pub mod stats;
pub mod synthetic;
pub mod validate;
