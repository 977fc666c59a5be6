//! Multilevel Otsu thresholding driven by a bacterial foraging optimizer, with
//! edge extraction on the thresholded image, small-component removal, and edge-map
//! quality metrics.
//!
//! Pipeline: [`imagecore::compute_histogram`] → [`pipeline::optimize_thresholds`] →
//! [`segment::apply_thresholds`] → [`segment::detect_edges`] → [`segment::area_open`]
//! → [`eval::evaluate_edges`].

pub mod bfo;
pub mod cli;
pub mod eval;
pub mod imagecore;
pub mod otsu;
pub mod pipeline;
pub mod segment;
pub mod synth;

pub use bfo::{BfoConfig, Bounds, OptimizeResult};
pub use eval::MetricReport;
pub use imagecore::{EdgeMap, GrayImage, Histogram};
pub use otsu::ThresholdSet;
pub use segment::{Connectivity, LabelMap};
