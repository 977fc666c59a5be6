//! Post-threshold pipeline stages: class labelling, edge extraction on the
//! piecewise-constant result, and removal of small connected edge fragments.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::imagecore::{EdgeMap, GrayImage};
use crate::otsu::ThresholdSet;

/// Row-major class indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    /// Panics if `labels.len() != width * height` or a dimension is zero.
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Self {
        assert!(width > 0 && height > 0, "label map needs non-zero dimensions");
        assert_eq!(labels.len(), width * height, "label count does not match dimensions");
        Self { width, height, labels }
    }

    /// Uses each intensity as a label.
    pub fn from_image(img: &GrayImage) -> Self {
        Self::new(img.width(), img.height(), img.pixels().iter().map(|&p| p as u32).collect())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Labels as intensities, saturating at 255.
    pub fn to_image(&self) -> GrayImage {
        let px = self.labels.iter().map(|&l| l.min(255) as u8).collect();
        GrayImage::new(self.width, self.height, px).expect("dimensions already validated")
    }
}

/// Labels each pixel with its class and renders the class mean intensity.
pub fn apply_thresholds(img: &GrayImage, ts: &ThresholdSet) -> (LabelMap, GrayImage) {
    let lut = class_lut(ts);
    let labels: Vec<u32> = img.pixels().iter().map(|&p| lut[p as usize]).collect();
    let levels = class_levels(img, ts);
    let rendered = labels.iter().map(|&l| levels[l as usize]).collect();
    let (w, h) = img.dimensions();
    (
        LabelMap::new(w, h, labels),
        GrayImage::new(w, h, rendered).expect("same dimensions as input"),
    )
}

/// Rendering intensity of each class: the rounded mean of the image pixels in the
/// class, or the midpoint of the class's gray-level range when it has no pixels.
pub fn class_levels(img: &GrayImage, ts: &ThresholdSet) -> Vec<u8> {
    let classes = ts.class_count();
    let lut = class_lut(ts);
    let mut sums = vec![0u64; classes];
    let mut counts = vec![0u64; classes];
    for &p in img.pixels() {
        let k = lut[p as usize] as usize;
        sums[k] += p as u64;
        counts[k] += 1;
    }
    (0..classes)
        .map(|k| {
            if counts[k] > 0 {
                (sums[k] as f64 / counts[k] as f64).round() as u8
            } else {
                let (lo, hi) = ts.class_range(k);
                ((lo + hi - 1) as f64 / 2.0).round() as u8
            }
        })
        .collect()
}

fn class_lut(ts: &ThresholdSet) -> [u32; 256] {
    let mut lut = [0u32; 256];
    for (level, slot) in lut.iter_mut().enumerate() {
        *slot = ts.class_of(level as u8) as u32;
    }
    lut
}

const NEIGHBORS_8: [(isize, isize); 8] =
    [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
const NEIGHBORS_4: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];

/// Marks every pixel that is the brighter member of at least one differing
/// 8-neighbour pair. Border pixels only compare against neighbours inside the frame.
pub fn detect_edges(thresholded: &GrayImage) -> EdgeMap {
    let (w, h) = thresholded.dimensions();
    let px = thresholded.pixels();
    let mut mask = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let v = px[y * w + x];
            mask[y * w + x] = NEIGHBORS_8.iter().any(|&(dx, dy)| {
                let (nx, ny) = (x as isize + dx, y as isize + dy);
                nx >= 0
                    && ny >= 0
                    && (nx as usize) < w
                    && (ny as usize) < h
                    && px[ny as usize * w + nx as usize] < v
            });
        }
    }
    EdgeMap::new(w, h, mask).expect("same dimensions as input")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Connectivity {
    #[serde(rename = "4")]
    Four,
    #[default]
    #[serde(rename = "8")]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        match self {
            Connectivity::Four => &NEIGHBORS_4,
            Connectivity::Eight => &NEIGHBORS_8,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            _ => Err(format!("connectivity must be 4 or 8, got {v}")),
        }
    }
}

/// Connected components of the edge pixels.
///
/// Returns per-pixel component ids (0 for background, components numbered from 1 in
/// raster order of their first pixel) and the size of each component (index `id - 1`).
pub fn connected_components(edges: &EdgeMap, connectivity: Connectivity) -> (Vec<u32>, Vec<usize>) {
    let (w, h) = edges.dimensions();
    let mask = edges.mask();
    let mut ids = vec![0u32; w * h];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask[start] || ids[start] != 0 {
            continue;
        }
        let id = sizes.len() as u32 + 1;
        ids[start] = id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(i) = queue.pop_front() {
            size += 1;
            let (x, y) = ((i % w) as isize, (i / w) as isize);
            for &(dx, dy) in connectivity.offsets() {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx as usize >= w || ny as usize >= h {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if mask[j] && ids[j] == 0 {
                    ids[j] = id;
                    queue.push_back(j);
                }
            }
        }
        sizes.push(size);
    }
    (ids, sizes)
}

/// Clears every connected component with fewer than `min_size` pixels.
pub fn area_open(edges: &EdgeMap, min_size: usize, connectivity: Connectivity) -> EdgeMap {
    assert!(min_size >= 1, "minimum component size must be at least 1");
    let (ids, sizes) = connected_components(edges, connectivity);
    let mask = ids
        .iter()
        .map(|&id| id != 0 && sizes[id as usize - 1] >= min_size)
        .collect();
    EdgeMap::new(edges.width(), edges.height(), mask).expect("same dimensions as input")
}
