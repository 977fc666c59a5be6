//! Synthetic test images with known region geometry and ground truth.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bfo::seeded_rng;
use crate::imagecore::{EdgeMap, GrayImage};
use crate::segment::{detect_edges, LabelMap};

/// Smallest side length for which every phantom region is guaranteed non-empty.
pub const MIN_SIDE: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("unknown synthetic image kind '{0}' (expected 'phantom' or 'bimodal')")]
    UnknownKind(String),
    #[error("synthetic images need both sides >= {MIN_SIDE}, got {0}x{1}")]
    TooSmall(usize, usize),
    #[error("noise sigma must be finite and non-negative, got {0}")]
    InvalidNoise(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthKind {
    /// Four nested elliptical regions of increasing brightness.
    Phantom,
    /// Bright discs on a darker background.
    Bimodal,
}

impl FromStr for SynthKind {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "phantom" => Ok(SynthKind::Phantom),
            "bimodal" => Ok(SynthKind::Bimodal),
            other => Err(SynthError::UnknownKind(other.to_string())),
        }
    }
}

impl fmt::Display for SynthKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthKind::Phantom => "phantom",
            SynthKind::Bimodal => "bimodal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthImage {
    pub image: GrayImage,
    /// Region index per pixel; brighter regions carry larger labels.
    pub labels: LabelMap,
    /// Brighter-side boundary pixels of the noise-free regions.
    pub reference_edges: EdgeMap,
    /// Noise-free intensity of each region.
    pub region_means: Vec<u8>,
}

pub fn generate(
    kind: SynthKind,
    width: usize,
    height: usize,
    noise_sigma: f64,
    seed: u64,
) -> Result<SynthImage, SynthError> {
    if width < MIN_SIDE || height < MIN_SIDE {
        return Err(SynthError::TooSmall(width, height));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(SynthError::InvalidNoise(noise_sigma.to_string()));
    }
    let mut rng = seeded_rng(seed);
    let (labels, region_means) = match kind {
        SynthKind::Phantom => phantom_regions(width, height, &mut rng),
        SynthKind::Bimodal => bimodal_regions(width, height, &mut rng),
    };

    let noise = Normal::new(0.0, noise_sigma).expect("sigma validated above");
    let pixels = labels
        .iter()
        .map(|&l| {
            let base = region_means[l as usize] as f64;
            let v = if noise_sigma > 0.0 { base + noise.sample(&mut rng) } else { base };
            v.round().clamp(0.0, 255.0) as u8
        })
        .collect();
    let image = GrayImage::new(width, height, pixels).expect("dimensions checked");
    let labels = LabelMap::new(width, height, labels);
    // labels are ordered like the region means, so edges on the label image fall on
    // the brighter side of every boundary
    let reference_edges = detect_edges(&labels.to_image());
    Ok(SynthImage { image, labels, reference_edges, region_means })
}

fn phantom_regions(w: usize, h: usize, rng: &mut impl Rng) -> (Vec<u32>, Vec<u8>) {
    let base = [40.0, 100.0, 160.0, 220.0];
    let means: Vec<u8> = base.iter().map(|m: &f64| (m + rng.gen_range(-10.0..=10.0)).round() as u8).collect();
    let (fw, fh) = (w as f64, h as f64);
    // (center x, center y, semi-axis x, semi-axis y) as fractions of the frame
    let shells = [(0.42, 0.40), (0.28, 0.26), (0.14, 0.13)];
    let ellipses: Vec<(f64, f64, f64, f64)> = shells
        .iter()
        .enumerate()
        .map(|(i, &(ax, ay))| {
            let jitter = 0.02 * (i as f64 + 1.0);
            let cx = fw * (0.5 + rng.gen_range(-jitter..=jitter));
            let cy = fh * (0.5 + rng.gen_range(-jitter..=jitter));
            (cx, cy, ax * fw, ay * fh)
        })
        .collect();
    let mut labels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let inside = |&(cx, cy, ax, ay): &(f64, f64, f64, f64)| {
                ((px - cx) / ax).powi(2) + ((py - cy) / ay).powi(2) <= 1.0
            };
            // innermost containing shell wins
            let label = ellipses.iter().rposition(inside).map_or(0, |i| i as u32 + 1);
            labels.push(label);
        }
    }
    (labels, means)
}

fn bimodal_regions(w: usize, h: usize, rng: &mut impl Rng) -> (Vec<u32>, Vec<u8>) {
    let dark = rng.gen_range(50..=90u8);
    let bright = rng.gen_range(150..=200u8);
    let (fw, fh) = (w as f64, h as f64);
    let r_max = fw.min(fh) * 0.25;
    let discs: Vec<(f64, f64, f64)> = (0..rng.gen_range(3..=6))
        .map(|_| {
            (
                rng.gen_range(0.15..0.85) * fw,
                rng.gen_range(0.15..0.85) * fh,
                rng.gen_range(0.35..1.0) * r_max,
            )
        })
        .collect();
    let mut labels = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
            let inside = discs
                .iter()
                .any(|&(cx, cy, r)| (px - cx).powi(2) + (py - cy).powi(2) <= r * r);
            labels.push(inside as u32);
        }
    }
    (labels, vec![dark, bright])
}
