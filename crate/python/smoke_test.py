"""Smoke test for the pybfoseg extension module.

Build and install first, e.g. ``maturin develop -m crates/python/Cargo.toml``.
"""

import os
import tempfile

import pybfoseg as bs


def main():
    s = bs.synth("phantom", 64, 64, noise=6.0, seed=3)
    img = s["image"]
    assert (img.width, img.height) == (64, 64)
    assert len(img.pixels) == 64 * 64

    counts = img.histogram()
    assert len(counts) == 256 and sum(counts) == 64 * 64

    best, j_opt = bs.exhaustive_search(counts, 2)
    assert abs(bs.between_class_variance(counts, best) - j_opt) < 1e-9

    cfg = bs.BfoConfig(seed=11)
    found = bs.optimize_thresholds(counts, 2, cfg)
    assert found["objective"] >= 0.99 * j_opt, (found, best, j_opt)
    assert found == bs.optimize_thresholds(counts, 2, bs.BfoConfig(seed=11))
    assert all(a <= b for a, b in zip(found["trace"], found["trace"][1:]))

    labels, thresholded = bs.apply_thresholds(img, found["thresholds"])
    assert len(labels) == 64 * 64 and max(labels) <= 2
    raw = bs.detect_edges(thresholded)
    cleaned = bs.area_open(raw, min_size=10, connectivity=8)
    assert cleaned.edge_count() <= raw.edge_count()

    seg = bs.segment(img, m=3, config=bs.BfoConfig(seed=1))
    ref = s["reference_edges"]
    metrics = bs.evaluate(seg["edges"], ref)
    assert 0.0 <= metrics["fom"] <= 1.0
    assert bs.figure_of_merit(ref, ref) == 1.0
    assert bs.rand_index(ref, ref) == 1.0
    assert bs.variation_of_information(ref, ref, base="bits") == 0.0
    assert bs.sobel_baseline(img, 100.0).edge_count() > 0

    with tempfile.TemporaryDirectory() as d:
        for name in ("edges.pgm", "edges.png"):
            path = os.path.join(d, name)
            seg["edges"].save(path)
            assert bs.EdgeMap.load(path) == seg["edges"]

    try:
        bs.exhaustive_search(counts, 5)
    except ValueError:
        pass
    else:
        raise AssertionError("m=5 should be refused")

    print(f"pybfoseg {bs.__version__}: thresholds {seg['thresholds']}, FOM {metrics['fom']:.3f}: OK")


if __name__ == "__main__":
    main()
