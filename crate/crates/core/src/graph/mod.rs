//! Graph types and the seed-driven instance construction.

mod build;
pub mod io;
mod layout;
mod multigraph;
mod params;

pub use build::{
    bare_path_instance, build_complete_tree, build_instance, build_path, decorate,
    forecast_counts, forecast_decoration, obfuscate, ForecastCounts, Instance, KindCounts,
};
pub use layout::{InstanceLayout, VertexKind, VertexRecord};
pub use multigraph::MultiGraph;
pub use params::{BuildParams, DecorationLevel, DecorationSchedule, TreeSpec, DEFAULT_VERTEX_CAP};
