use bfoseg::imagecore::{
    compute_histogram, decode_image, encode_pgm, load_image, save_image, save_pgm, GrayImage,
    PgmEncoding,
};
use proptest::prelude::*;

mod common;

proptest! {
    #[test]
    fn pgm_round_trip_is_bit_exact(img in common::arb_image(24, 255)) {
        for enc in [PgmEncoding::Plain, PgmEncoding::Raw] {
            let back = decode_image(&encode_pgm(&img, enc)).unwrap();
            prop_assert_eq!(&back, &img);
        }
    }

    #[test]
    fn histogram_ignores_pixel_order(img in common::arb_image(16, 255), seed in any::<u64>()) {
        let mut px = img.pixels().to_vec();
        // deterministic Fisher-Yates driven by a simple LCG
        let mut s = seed | 1;
        for i in (1..px.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            px.swap(i, (s >> 33) as usize % (i + 1));
        }
        let shuffled = GrayImage::new(img.width(), img.height(), px).unwrap();
        prop_assert_eq!(compute_histogram(&img), compute_histogram(&shuffled));
    }

    #[test]
    fn histogram_totals(img in common::arb_image(20, 255)) {
        let h = compute_histogram(&img);
        prop_assert_eq!(h.counts().iter().sum::<u64>(), (img.width() * img.height()) as u64);
        prop_assert_eq!(h.total(), (img.width() * img.height()) as u64);
        let p: f64 = h.probabilities().iter().sum();
        prop_assert!((p - 1.0).abs() < 1e-12);
    }
}

#[test]
fn file_round_trip_for_pgm_and_png() {
    let dir = tempfile::tempdir().unwrap();
    let img = GrayImage::new(2, 2, vec![0, 0, 1, 2]).unwrap();
    for name in ["a.pgm", "b.png"] {
        let path = dir.path().join(name);
        save_image(&img, &path).unwrap();
        assert_eq!(load_image(&path).unwrap(), img);
    }
    let plain = dir.path().join("c.pgm");
    save_pgm(&img, &plain, PgmEncoding::Plain).unwrap();
    assert!(std::fs::read_to_string(&plain).unwrap().starts_with("P2\n2 2\n255\n"));
    assert_eq!(load_image(&plain).unwrap(), img);
}

#[test]
fn edge_map_saves_as_binary_pgm() {
    let dir = tempfile::tempdir().unwrap();
    let img = GrayImage::from_fn(6, 6, |x, _| if x < 3 { 20 } else { 90 }).unwrap();
    let edges = bfoseg::segment::detect_edges(&img);
    let path = dir.path().join("edges.pgm");
    save_image(&edges.to_image(), &path).unwrap();
    let back = load_image(&path).unwrap();
    assert!(back.pixels().iter().all(|&p| p == 0 || p == 255));
    assert_eq!(back.pixels().iter().filter(|&&p| p == 255).count(), 6);
}
