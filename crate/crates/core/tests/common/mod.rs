//! Brute-force reference implementations used as independent oracles.
#![allow(dead_code)]

use bfoseg::imagecore::{EdgeMap, GrayImage};
use proptest::prelude::*;

/// Rand index by direct enumeration of all unordered pixel pairs.
pub fn rand_index_pairs(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len();
    let (mut agree, mut total) = (0u64, 0u64);
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (a[i] == a[j]) == (b[i] == b[j]) {
                agree += 1;
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        agree as f64 / total as f64
    }
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// VI = H(A) + H(B) - 2 I(A;B), with I = H(A) + H(B) - H(A,B), from dense count tables.
pub fn vi_entropies(a: &[u32], b: &[u32]) -> f64 {
    let n = a.len() as f64;
    let ka = *a.iter().max().unwrap() as usize + 1;
    let kb = *b.iter().max().unwrap() as usize + 1;
    let mut ca = vec![0usize; ka];
    let mut cb = vec![0usize; kb];
    let mut cab = vec![0usize; ka * kb];
    for (&x, &y) in a.iter().zip(b) {
        ca[x as usize] += 1;
        cb[y as usize] += 1;
        cab[x as usize * kb + y as usize] += 1;
    }
    let ha = entropy(ca.into_iter(), n);
    let hb = entropy(cb.into_iter(), n);
    let hab = entropy(cab.into_iter(), n);
    let mutual = ha + hb - hab;
    ha + hb - 2.0 * mutual
}

/// Figure of merit with nearest reference pixels found by scanning every pixel.
pub fn fom_scan(candidate: &EdgeMap, reference: &EdgeMap, alpha: f64) -> f64 {
    let (w, h) = candidate.dimensions();
    let refs: Vec<(i64, i64)> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .filter(|&(x, y)| reference.get(x, y))
        .map(|(x, y)| (x as i64, y as i64))
        .collect();
    let mut sum = 0.0;
    let mut nc = 0;
    for y in 0..h {
        for x in 0..w {
            if !candidate.get(x, y) {
                continue;
            }
            nc += 1;
            let d2 = refs
                .iter()
                .map(|&(rx, ry)| (rx - x as i64).pow(2) + (ry - y as i64).pow(2))
                .min()
                .unwrap();
            sum += 1.0 / (1.0 + alpha * d2 as f64);
        }
    }
    sum / nc.max(refs.len()) as f64
}

/// Component sizes via union-find over explicit neighbour pairs.
pub fn component_sizes_union_find(e: &EdgeMap, eight: bool) -> Vec<usize> {
    let (w, h) = e.dimensions();
    let mut parent: Vec<usize> = (0..w * h).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for y in 0..h {
        for x in 0..w {
            if !e.get(x, y) {
                continue;
            }
            let mut nbrs = vec![(x + 1, y), (x, y + 1)];
            if eight {
                nbrs.push((x + 1, y + 1));
                if x > 0 {
                    nbrs.push((x - 1, y + 1));
                }
            }
            for (nx, ny) in nbrs {
                if nx < w && ny < h && e.get(nx, ny) {
                    let (a, b) = (find(&mut parent, y * w + x), find(&mut parent, ny * w + nx));
                    parent[a] = b;
                }
            }
        }
    }
    let mut sizes = std::collections::BTreeMap::new();
    for i in 0..w * h {
        if e.mask()[i] {
            *sizes.entry(find(&mut parent, i)).or_insert(0usize) += 1;
        }
    }
    let mut v: Vec<usize> = sizes.into_values().collect();
    v.sort_unstable();
    v
}

pub fn arb_edge_map(max_side: usize) -> impl Strategy<Value = EdgeMap> {
    (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
        proptest::collection::vec(proptest::bool::weighted(0.3), w * h)
            .prop_map(move |m| EdgeMap::new(w, h, m).unwrap())
    })
}

pub fn arb_labels(max_side: usize, max_label: u32) -> impl Strategy<Value = (usize, usize, Vec<u32>, Vec<u32>)> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        (
            Just(w),
            Just(h),
            proptest::collection::vec(0..=max_label, w * h),
            proptest::collection::vec(0..=max_label, w * h),
        )
    })
}

pub fn arb_image(max_side: usize, levels: u8) -> impl Strategy<Value = GrayImage> {
    (1..=max_side, 1..=max_side).prop_flat_map(move |(w, h)| {
        proptest::collection::vec(0..=levels, w * h)
            .prop_map(move |px| GrayImage::new(w, h, px).unwrap())
    })
}
