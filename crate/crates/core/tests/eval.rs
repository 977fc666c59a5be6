use bfoseg::eval::{
    figure_of_merit, rand_index, sobel_baseline, variation_of_information, DEFAULT_ALPHA,
};
use bfoseg::imagecore::{EdgeMap, GrayImage};
use bfoseg::segment::LabelMap;
use proptest::prelude::*;

mod common;

proptest! {
    #[test]
    fn rand_index_matches_pair_enumeration((w, h, a, b) in common::arb_labels(12, 3)) {
        let (la, lb) = (LabelMap::new(w, h, a.clone()), LabelMap::new(w, h, b.clone()));
        let ri = rand_index(&la, &lb).unwrap();
        prop_assert!((ri - common::rand_index_pairs(&a, &b)).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&ri));
        prop_assert_eq!(ri, rand_index(&lb, &la).unwrap());
    }

    #[test]
    fn vi_matches_entropy_tables((w, h, a, b) in common::arb_labels(12, 4)) {
        let (la, lb) = (LabelMap::new(w, h, a.clone()), LabelMap::new(w, h, b.clone()));
        let vi = variation_of_information(&la, &lb).unwrap();
        prop_assert!((vi - common::vi_entropies(&a, &b)).abs() < 1e-9);
        prop_assert!((vi - variation_of_information(&lb, &la).unwrap()).abs() < 1e-12);
        prop_assert!(vi >= 0.0);
    }

    #[test]
    fn relabelling_changes_nothing((w, h, a, b) in common::arb_labels(10, 3)) {
        let perm = [2u32, 0, 3, 1];
        let relabelled: Vec<u32> = a.iter().map(|&l| perm[l as usize] + 10).collect();
        let (la, lb, lr) = (
            LabelMap::new(w, h, a), LabelMap::new(w, h, b), LabelMap::new(w, h, relabelled),
        );
        prop_assert_eq!(rand_index(&la, &lb).unwrap(), rand_index(&lr, &lb).unwrap());
        let d = variation_of_information(&la, &lb).unwrap() - variation_of_information(&lr, &lb).unwrap();
        prop_assert!(d.abs() < 1e-12);
    }

    #[test]
    fn vi_triangle_inequality(
        (w, h, a, b) in common::arb_labels(8, 3),
        seed in any::<u64>(),
    ) {
        let c: Vec<u32> = (0..w * h).map(|i| ((seed >> (i % 60)) as u32 ^ i as u32) % 3).collect();
        let (la, lb, lc) = (LabelMap::new(w, h, a), LabelMap::new(w, h, b), LabelMap::new(w, h, c));
        let ab = variation_of_information(&la, &lb).unwrap();
        let bc = variation_of_information(&lb, &lc).unwrap();
        let ac = variation_of_information(&la, &lc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn fom_matches_nearest_pixel_scan(
        (c, r) in (1usize..=14, 1usize..=14).prop_flat_map(|(w, h)| {
            let m = move || proptest::collection::vec(proptest::bool::weighted(0.2), w * h)
                .prop_map(move |v| EdgeMap::new(w, h, v).unwrap());
            (m(), m())
        })
    ) {
        prop_assume!(r.edge_count() > 0);
        let fom = figure_of_merit(&c, &r, DEFAULT_ALPHA).unwrap();
        prop_assert!((fom - common::fom_scan(&c, &r, DEFAULT_ALPHA)).abs() < 1e-9);
        prop_assert!((0.0..=1.0).contains(&fom));
        prop_assert_eq!(fom == 1.0, c == r);
    }
}

#[test]
fn fom_decreases_as_a_pixel_moves_away() {
    let mut r = EdgeMap::empty(30, 5).unwrap();
    r.set(0, 2, true);
    r.set(1, 2, true);
    let mut last = f64::INFINITY;
    for x in 1..30 {
        let mut c = EdgeMap::empty(30, 5).unwrap();
        c.set(0, 2, true);
        c.set(x, 2, true);
        let f = figure_of_merit(&c, &r, DEFAULT_ALPHA).unwrap();
        assert!(f <= last, "x = {x}");
        last = f;
    }
}

#[test]
fn edge_maps_as_binary_labellings() {
    let a = EdgeMap::new(2, 2, vec![false, false, true, true]).unwrap();
    let b = EdgeMap::new(2, 2, vec![false, true, true, true]).unwrap();
    assert_eq!(rand_index(&a, &b).unwrap(), 0.5);
}

#[test]
fn sobel_step_marks_two_columns() {
    let step = GrayImage::from_fn(8, 6, |x, _| if x < 4 { 0 } else { 255 }).unwrap();
    let e = sobel_baseline(&step, 500.0);
    for y in 0..6 {
        let cols: Vec<usize> = (0..8).filter(|&x| e.get(x, y)).collect();
        assert_eq!(cols, vec![3, 4]);
    }
}
