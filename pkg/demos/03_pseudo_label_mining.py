"""
Mining dense pseudo-labels from teacher detections
==================================================

A teacher network's detections are kept when their calibrated score clears
a threshold; then a handful of pixels per detection become (c, u, v)
training targets for a student. Four rules pick the pixels.
"""
import tempfile

import numpy as np

from dptransfer.distillation import (DetectionRecord, build_dataset, load_detections,
                                     save_detections)

rng = np.random.default_rng(7)


def fake_detection(det_id, h=16, w=12):
    """A blob of foreground with 24 chart channels plus background at channel 0."""
    yy, xx = np.mgrid[0:h, 0:w]
    blob = np.exp(-(((yy - h / 2) / (h / 3)) ** 2 + ((xx - w / 2) / (w / 3)) ** 2))
    logits = rng.normal(size=(25, h, w))
    logits[0] += 3 * (1 - 2 * blob)
    part = np.exp(logits) / np.exp(logits).sum(axis=0)
    uv = rng.uniform(size=(2, h, w))
    sigma = 0.01 + rng.exponential(0.1, size=(2, h, w))
    x0, y0 = rng.uniform(0, 200, size=2)
    return DetectionRecord(det_id, (x0, y0, x0 + 3 * w, y0 + 3 * h), float(rng.uniform()),
                           blob, part, uv, sigma)


records = [fake_detection(i) for i in range(8)]
print("scores:", [round(r.score, 2) for r in records])

###############################################################################
# Tensors and a JSON manifest on disk are the interchange format.

with tempfile.TemporaryDirectory() as tmp:
    records = load_detections(save_detections(records, tmp))

###############################################################################
# Same detections, four selection rules, k = 5 pixels per detection.

for strategy in ("uniform", "mask", "part", "uv"):
    sets, manifest = build_dataset(records, strategy, k=5, tau=0.5, seed=0)
    first = sets[0] if sets else None
    print(f"{strategy:8s} kept {manifest['n_kept']}/{manifest['n_detections']} detections, "
          f"{manifest['n_labels']} labels", end="")
    if first is not None and len(first):
        print(f"; detection {first.detection} top pixel ({first.rows[0]}, {first.cols[0]}) "
              f"chart {first.c[0]} score {first.score[0]:.3f}")
    else:
        print()
