//! Segmentation and edge-map quality metrics, and a Sobel edge baseline.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::imagecore::{EdgeMap, GrayImage};
use crate::segment::LabelMap;

/// Pratt's scaling constant.
pub const DEFAULT_ALPHA: f64 = 1.0 / 9.0;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),
    #[error("reference edge map has no edge pixels")]
    EmptyReference,
}

/// Something that assigns a discrete label to every pixel of a grid.
pub trait Labeling {
    fn dimensions(&self) -> (usize, usize);
    fn label_vec(&self) -> Vec<u32>;
}

impl Labeling for LabelMap {
    fn dimensions(&self) -> (usize, usize) {
        LabelMap::dimensions(self)
    }

    fn label_vec(&self) -> Vec<u32> {
        self.labels().to_vec()
    }
}

/// Binary labelling: 1 for edge pixels, 0 otherwise.
impl Labeling for EdgeMap {
    fn dimensions(&self) -> (usize, usize) {
        EdgeMap::dimensions(self)
    }

    fn label_vec(&self) -> Vec<u32> {
        self.mask().iter().map(|&m| m as u32).collect()
    }
}

impl Labeling for GrayImage {
    fn dimensions(&self) -> (usize, usize) {
        GrayImage::dimensions(self)
    }

    fn label_vec(&self) -> Vec<u32> {
        self.pixels().iter().map(|&p| p as u32).collect()
    }
}

fn check_dims(a: (usize, usize), b: (usize, usize)) -> Result<(), EvalError> {
    if a != b {
        return Err(EvalError::DimensionMismatch(a.0, a.1, b.0, b.1));
    }
    Ok(())
}

/// Squared Euclidean distance from every pixel to the nearest `true` pixel of `edges`,
/// or `None` everywhere if the map is empty.
///
/// Exact separable transform: a per-row two-pass scan followed by a per-column lower
/// envelope of parabolas (Felzenszwalb–Huttenlocher), all in integer arithmetic.
pub fn squared_distance_transform(edges: &EdgeMap) -> Option<Vec<u64>> {
    if edges.edge_count() == 0 {
        return None;
    }
    let (w, h) = edges.dimensions();

    // nearest edge within the same row, as a horizontal offset
    let mut row_dist: Vec<Option<u64>> = vec![None; w * h];
    for y in 0..h {
        let row = &edges.mask()[y * w..(y + 1) * w];
        let mut last: Option<usize> = None;
        for x in 0..w {
            if row[x] {
                last = Some(x);
            }
            row_dist[y * w + x] = last.map(|l| (x - l) as u64);
        }
        let mut next: Option<usize> = None;
        for x in (0..w).rev() {
            if row[x] {
                next = Some(x);
            }
            if let Some(n) = next {
                let d = (n - x) as u64;
                let slot = &mut row_dist[y * w + x];
                *slot = Some(slot.map_or(d, |cur| cur.min(d)));
            }
        }
    }

    let mut out = vec![0u64; w * h];
    let mut column: Vec<Option<u64>> = vec![None; h];
    let mut sites: Vec<(i64, i64)> = Vec::with_capacity(h);
    for x in 0..w {
        for y in 0..h {
            column[y] = row_dist[y * w + x].map(|d| d * d);
        }
        lower_envelope(&column, &mut sites);
        // sites is non-empty: some row holds an edge, so every column sees it
        let mut k = 0;
        for y in 0..h as i64 {
            while k + 1 < sites.len() && {
                let (q0, f0) = sites[k];
                let (q1, f1) = sites[k + 1];
                (y - q1) * (y - q1) + f1 <= (y - q0) * (y - q0) + f0
            } {
                k += 1;
            }
            let (q, f) = sites[k];
            out[y as usize * w + x] = ((y - q) * (y - q) + f) as u64;
        }
    }
    Some(out)
}

// Parabolas (q, f(q)) that form the lower envelope of y -> (y - q)^2 + f(q), in order.
fn lower_envelope(f: &[Option<u64>], sites: &mut Vec<(i64, i64)>) {
    sites.clear();
    for (q, fq) in f.iter().enumerate() {
        let Some(fq) = *fq else { continue };
        let cand = (q as i64, fq as i64);
        // drop the top site while the candidate overtakes it no later than it overtook
        // its predecessor
        while sites.len() >= 2 {
            let a = sites[sites.len() - 2];
            let b = sites[sites.len() - 1];
            if crossing_le(b, cand, a, b) {
                sites.pop();
            } else {
                break;
            }
        }
        sites.push(cand);
    }
}

// Crossing point of parabolas u < v: s(u, v) = ((f_v + v^2) - (f_u + u^2)) / (2 (v - u)).
// Returns s(c, d) <= s(a, b) compared exactly by cross-multiplication.
fn crossing_le(c: (i64, i64), d: (i64, i64), a: (i64, i64), b: (i64, i64)) -> bool {
    let num = |u: (i64, i64), v: (i64, i64)| (v.1 + v.0 * v.0) - (u.1 + u.0 * u.0);
    let den = |u: (i64, i64), v: (i64, i64)| 2 * (v.0 - u.0);
    (num(c, d) as i128) * (den(a, b) as i128) <= (num(a, b) as i128) * (den(c, d) as i128)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FomDetail {
    pub value: f64,
    pub candidate_edges: usize,
    pub reference_edges: usize,
}

/// Pratt figure of merit of `candidate` against `reference`.
pub fn figure_of_merit(
    candidate: &EdgeMap,
    reference: &EdgeMap,
    alpha: f64,
) -> Result<f64, EvalError> {
    figure_of_merit_detail(candidate, reference, alpha).map(|d| d.value)
}

pub fn figure_of_merit_detail(
    candidate: &EdgeMap,
    reference: &EdgeMap,
    alpha: f64,
) -> Result<FomDetail, EvalError> {
    check_dims(candidate.dimensions(), reference.dimensions())?;
    let dist = squared_distance_transform(reference).ok_or(EvalError::EmptyReference)?;
    let candidate_edges = candidate.edge_count();
    let reference_edges = reference.edge_count();
    let sum: f64 = candidate
        .mask()
        .iter()
        .zip(&dist)
        .filter(|(&on, _)| on)
        .map(|(_, &d2)| 1.0 / (1.0 + alpha * d2 as f64))
        .sum();
    Ok(FomDetail {
        value: sum / candidate_edges.max(reference_edges) as f64,
        candidate_edges,
        reference_edges,
    })
}

/// Joint label counts of two labellings.
#[derive(Debug, Clone)]
pub struct Contingency {
    pub total: u64,
    pub joint: HashMap<(u32, u32), u64>,
    pub rows: HashMap<u32, u64>,
    pub cols: HashMap<u32, u64>,
}

impl Contingency {
    pub fn new<A: Labeling + ?Sized, B: Labeling + ?Sized>(a: &A, b: &B) -> Result<Self, EvalError> {
        check_dims(a.dimensions(), b.dimensions())?;
        let (la, lb) = (a.label_vec(), b.label_vec());
        let mut joint = HashMap::new();
        let mut rows = HashMap::new();
        let mut cols = HashMap::new();
        for (&x, &y) in la.iter().zip(&lb) {
            *joint.entry((x, y)).or_insert(0) += 1;
            *rows.entry(x).or_insert(0) += 1;
            *cols.entry(y).or_insert(0) += 1;
        }
        Ok(Self { total: la.len() as u64, joint, rows, cols })
    }

    /// Number of unordered pixel pairs on which both labellings agree.
    pub fn agreeing_pairs(&self) -> u128 {
        let pairs = |n: u64| (n as u128) * (n as u128).saturating_sub(1) / 2;
        let same_both: u128 = self.joint.values().map(|&n| pairs(n)).sum();
        let same_a: u128 = self.rows.values().map(|&n| pairs(n)).sum();
        let same_b: u128 = self.cols.values().map(|&n| pairs(n)).sum();
        // together-in-both plus apart-in-both
        pairs(self.total) + 2 * same_both - same_a - same_b
    }

    pub fn total_pairs(&self) -> u128 {
        (self.total as u128) * (self.total as u128).saturating_sub(1) / 2
    }
}

pub fn rand_index<A: Labeling + ?Sized, B: Labeling + ?Sized>(a: &A, b: &B) -> Result<f64, EvalError> {
    let c = Contingency::new(a, b)?;
    Ok(rand_index_from(&c))
}

fn rand_index_from(c: &Contingency) -> f64 {
    let total = c.total_pairs();
    if total == 0 {
        return 1.0;
    }
    c.agreeing_pairs() as f64 / total as f64
}

/// Logarithm base used for information quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

/// `H(A) + H(B) - 2 I(A; B)` in nats.
pub fn variation_of_information<A: Labeling + ?Sized, B: Labeling + ?Sized>(
    a: &A,
    b: &B,
) -> Result<f64, EvalError> {
    variation_of_information_in(a, b, LogBase::Nats)
}

pub fn variation_of_information_in<A: Labeling + ?Sized, B: Labeling + ?Sized>(
    a: &A,
    b: &B,
    base: LogBase,
) -> Result<f64, EvalError> {
    let c = Contingency::new(a, b)?;
    Ok(variation_of_information_from(&c, base))
}

fn variation_of_information_from(c: &Contingency, base: LogBase) -> f64 {
    let n = c.total as f64;
    // VI = -Σ p_ij [ln(p_ij / p_i) + ln(p_ij / p_j)]
    let vi: f64 = c
        .joint
        .iter()
        .map(|(&(i, j), &nij)| {
            let nij = nij as f64;
            let ni = c.rows[&i] as f64;
            let nj = c.cols[&j] as f64;
            -(nij / n) * ((nij / ni).ln() + (nij / nj).ln())
        })
        .sum();
    let vi = vi.max(0.0);
    match base {
        LogBase::Nats => vi,
        LogBase::Bits => vi / std::f64::consts::LN_2,
    }
}

/// 3×3 Sobel gradient magnitude with replicated borders.
pub fn sobel_magnitude(img: &GrayImage) -> Vec<f64> {
    let (w, h) = img.dimensions();
    let at = |x: isize, y: isize| -> f64 {
        let cx = x.clamp(0, w as isize - 1) as usize;
        let cy = y.clamp(0, h as isize - 1) as usize;
        img.get(cx, cy) as f64
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out.push((gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Pixels whose Sobel gradient magnitude is at least `threshold`.
pub fn sobel_baseline(img: &GrayImage, threshold: f64) -> EdgeMap {
    let mask = sobel_magnitude(img).into_iter().map(|m| m >= threshold).collect();
    EdgeMap::new(img.width(), img.height(), mask).expect("same dimensions as input")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCounts {
    pub candidate_edges: usize,
    pub reference_edges: usize,
    pub pixels: u64,
    pub total_pairs: u128,
    pub agreeing_pairs: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub fom: f64,
    pub rand_index: f64,
    pub vi: f64,
    pub counts: MetricCounts,
}

/// Figure of merit plus Rand index and VI on the binary edge labellings.
pub fn evaluate_edges(
    candidate: &EdgeMap,
    reference: &EdgeMap,
    alpha: f64,
    base: LogBase,
) -> Result<MetricReport, EvalError> {
    let fom = figure_of_merit_detail(candidate, reference, alpha)?;
    let c = Contingency::new(candidate, reference)?;
    Ok(MetricReport {
        fom: fom.value,
        rand_index: rand_index_from(&c),
        vi: variation_of_information_from(&c, base),
        counts: MetricCounts {
            candidate_edges: fom.candidate_edges,
            reference_edges: fom.reference_edges,
            pixels: c.total,
            total_pairs: c.total_pairs(),
            agreeing_pairs: c.agreeing_pairs(),
        },
    })
}
