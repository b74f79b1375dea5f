//! File formats: CSV dataset ingestion/emission and versioned JSON model
//! documents.

pub mod csv;
pub mod model_json;
