//! Link deletion against real diffusion cascades.
//!
//! Reconstructs who-passed-what-to-whom graphs from cascade logs and a
//! follower network, removes follow links chosen by a deletion strategy, and
//! estimates how many users each cascade would still reach.
//!
//! * [`graph`]: CSR digraphs, reachability, edge betweenness, leading eigenpair
//! * [`ingest`]: file formats, cascade filtering, dataset statistics
//! * [`diffusion`]: non-tree and tree diffusion graphs, seed users
//! * [`deletion`]: NetMelt, betweenness, edge-degree and random plans
//! * [`estimator`]: post-deletion cascade sizes
//! * [`experiment`]: budget sweeps and plot data

pub mod deletion;
pub mod diffusion;
pub mod error;
pub mod estimator;
pub mod experiment;
pub mod graph;
pub mod ingest;

pub use deletion::{DeletionPlan, RankedEdge, Strategy};
pub use diffusion::{DiffusionGraph, Variant};
pub use error::{Error, Result};
pub use estimator::{CascadeEstimate, EstimateReport};
pub use graph::{DirectedGraph, EigenPair, NodeId};
pub use ingest::{CascadeLog, DatasetStats, Event};
