//! The co-URL graph: TF-IDF user-URL matrix, cosine similarity projection,
//! k-core filtering, structural metrics, and exports.

mod export;
mod kcore;
mod matrix;
mod metrics;
mod network;
mod similarity;

pub use self::export::{write_edge_list, write_graphml};
pub use self::kcore::{core_numbers, k_core};
pub use self::matrix::{build_matrix, Builder, MatrixSnapshot, Row, TfIdfVariant, UserUrlMatrix};
pub use self::metrics::{components, graph_metrics, DisjointSet, GraphMetrics};
pub use self::network::{Adjacency, Edge, NetworkMeta, NetworkSnapshot, SimilarityNetwork};
pub use self::similarity::{cosine, project, project_similarity, Projection, ProjectionDiagnostics};
