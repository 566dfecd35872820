//! Persistence and export: model JSON, corpus files, Cayley tables and PCA projections.

mod cayley;
mod corpus;
mod model_file;
mod pca;

pub use cayley::{dump_cayley_table, signed_blade, CAYLEY_MAX_DIMENSION};
pub use corpus::{corpus_from_text, ingest_corpus, UNKNOWN_TOKEN};
pub use model_file::{
    from_json, load_model, save_model, to_json, write_atomic, Model, ModelDocument, ModelMetadata, FORMAT_VERSION,
};
pub use pca::{
    principal_components, project_embeddings, projection_csv, Projection, ProjectionRow, DEGENERATE_VARIANCE,
};

#[cfg(test)]
mod tests;
