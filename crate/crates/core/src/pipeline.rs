//! Composition of the stages into threshold search and full segmentation runs.

use serde::{Deserialize, Serialize};

use crate::bfo::{self, BfoConfig, BfoError, Bounds, OptimizeResult};
use crate::imagecore::{compute_histogram, EdgeMap, GrayImage, Histogram, LEVELS};
use crate::otsu::{ThresholdObjective, ThresholdSet};
use crate::segment::{apply_thresholds, area_open, detect_edges, Connectivity, LabelMap};

/// Search box for threshold coordinates.
pub const THRESHOLD_BOUNDS: Bounds = Bounds { lo: 1.0, hi: (LEVELS - 1) as f64 };

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSearch {
    pub thresholds: ThresholdSet,
    pub objective: f64,
    pub run: OptimizeResult,
}

/// Maximizes between-class variance over `m` thresholds with the foraging optimizer.
pub fn optimize_thresholds(
    hist: &Histogram,
    m: usize,
    cfg: &BfoConfig,
) -> Result<ThresholdSearch, BfoError> {
    let objective = ThresholdObjective::new(hist);
    let run = bfo::optimize(&objective, m, THRESHOLD_BOUNDS, cfg)?;
    let thresholds = ThresholdSet::from_relaxed(&run.best_position)
        .map_err(|e| BfoError::InvalidConfig(e.to_string()))?;
    Ok(ThresholdSearch { thresholds, objective: run.best_value, run })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostProcess {
    /// Components with fewer pixels than this are removed.
    pub min_component: usize,
    pub connectivity: Connectivity,
}

impl Default for PostProcess {
    fn default() -> Self {
        Self { min_component: 10, connectivity: Connectivity::Eight }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub search: ThresholdSearch,
    pub labels: LabelMap,
    pub thresholded: GrayImage,
    /// Edges before small-component removal.
    pub raw_edges: EdgeMap,
    pub edges: EdgeMap,
}

/// Threshold search, class rendering, edge extraction and area opening.
pub fn segment_image(
    img: &GrayImage,
    m: usize,
    cfg: &BfoConfig,
    post: PostProcess,
) -> Result<Segmentation, BfoError> {
    let search = optimize_thresholds(&compute_histogram(img), m, cfg)?;
    let (labels, thresholded) = apply_thresholds(img, &search.thresholds);
    let raw_edges = detect_edges(&thresholded);
    let edges = area_open(&raw_edges, post.min_component.max(1), post.connectivity);
    Ok(Segmentation { search, labels, thresholded, raw_edges, edges })
}
