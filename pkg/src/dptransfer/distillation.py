"""Dense pseudo-label mining from teacher detections.

Detections are filtered by calibrated score, then each surviving detection
contributes at most ``k`` labelled pixels chosen by one of four strategies:

``uniform``  seeded draw without replacement
``mask``     highest foreground posterior
``part``     highest chart posterior (max over the body-chart channels)
``uv``       lowest uv uncertainty (``sigma_u**2 + sigma_v**2`` by default)

Only pixels whose part posterior argmax is a body chart (not channel 0,
background) are candidates. Ranking ties resolve in row-major pixel order.
"""
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .calibration import DEFAULT_SIGMA_MIN
from .errors import ValidationError
from .tensorio import read_tensor, write_tensor

STRATEGIES = ("uniform", "mask", "part", "uv")
UV_COMBINE = ("sum_var", "max", "mean")
DEFAULT_K = 5
DEFAULT_TAU = 0.5
DEFAULT_NUM_PART_CLASSES = 25  # 24 charts + background
BACKGROUND = 0


@dataclass(frozen=True, eq=False)
class DetectionRecord:
    """One teacher detection.

    ``part_posterior`` has shape (K_I, H, W) with channel 0 the background
    and channel ``c`` chart ``c``; ``uv`` and ``uv_sigma`` have shape
    (2, H, W); ``fg_posterior`` has shape (H, W).
    """

    id: int
    box: tuple
    score: float
    fg_posterior: np.ndarray
    part_posterior: np.ndarray
    uv: np.ndarray
    uv_sigma: np.ndarray
    sigma_min: float = DEFAULT_SIGMA_MIN

    def __post_init__(self):
        if len(self.box) != 4:
            raise ValidationError(f"detection {self.id}: box must have 4 entries")
        x0, y0, x1, y1 = (float(b) for b in self.box)
        if not (x0 < x1 and y0 < y1):
            raise ValidationError(f"detection {self.id}: degenerate box {self.box}")
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(f"detection {self.id}: score {self.score} outside [0, 1]")
        fg = np.asarray(self.fg_posterior, dtype=np.float64)
        part = np.asarray(self.part_posterior, dtype=np.float64)
        uv = np.asarray(self.uv, dtype=np.float64)
        sig = np.asarray(self.uv_sigma, dtype=np.float64)
        if fg.ndim != 2:
            raise ValidationError(f"detection {self.id}: fg posterior must be H x W")
        h, w = fg.shape
        if part.ndim != 3 or part.shape[1:] != (h, w) or part.shape[0] < 2:
            raise ValidationError(f"detection {self.id}: part posterior must be K_I x {h} x {w}")
        if uv.shape != (2, h, w) or sig.shape != (2, h, w):
            raise ValidationError(f"detection {self.id}: uv maps must be 2 x {h} x {w}")
        for name, arr in (("fg", fg), ("part", part), ("uv", uv)):
            if not (np.all(np.isfinite(arr)) and (arr >= 0).all() and (arr <= 1).all()):
                raise ValidationError(f"detection {self.id}: {name} values outside [0, 1]")
        if np.abs(part.sum(axis=0) - 1.0).max() > 1e-5:
            raise ValidationError(f"detection {self.id}: part posterior does not sum to 1 per pixel")
        if not np.all(np.isfinite(sig)) or (sig < self.sigma_min).any():
            raise ValidationError(f"detection {self.id}: uv sigma below sigma_min={self.sigma_min}")
        object.__setattr__(self, "box", (x0, y0, x1, y1))
        object.__setattr__(self, "score", float(self.score))
        for name, arr in (("fg_posterior", fg), ("part_posterior", part), ("uv", uv), ("uv_sigma", sig)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self):
        return self.fg_posterior.shape

    @property
    def n_charts(self):
        return self.part_posterior.shape[0] - 1

    def pixel_center(self, row, col):
        """Image coordinates (x, y) of the centre of a pixel of the H x W grid."""
        h, w = self.shape
        x0, y0, x1, y1 = self.box
        return x0 + (col + 0.5) * (x1 - x0) / w, y0 + (row + 0.5) * (y1 - y0) / h


@dataclass(frozen=True, eq=False)
class PseudoLabelSet:
    detection: int
    strategy: str
    k: int
    rows: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    cols: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    c: np.ndarray = field(default_factory=lambda: np.empty(0, np.int64))
    u: np.ndarray = field(default_factory=lambda: np.empty(0))
    v: np.ndarray = field(default_factory=lambda: np.empty(0))
    score: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        cols = [np.asarray(getattr(self, name)) for name in ("rows", "cols", "c", "u", "v", "score")]
        if len({len(col) for col in cols}) != 1:
            raise ValidationError("pseudo-label columns differ in length")
        rows, pcols, c, u, v, score = cols
        if len(rows) > self.k:
            raise ValidationError(f"{len(rows)} labels exceed k={self.k}")
        if len(set(zip(rows.tolist(), pcols.tolist()))) != len(rows):
            raise ValidationError("duplicate pixel in pseudo-label set")
        if (c < 1).any() or (u < 0).any() or (u > 1).any() or (v < 0).any() or (v > 1).any():
            raise ValidationError("chart index or uv out of range")
        if (np.diff(score) > 0).any():
            raise ValidationError("selection scores must be non-increasing")

    def __len__(self):
        return len(self.rows)

    def to_json(self):
        labels = [{"row": r, "col": cc, "c": ch, "u": u, "v": v, "score": s}
                  for r, cc, ch, u, v, s in zip(self.rows.tolist(), self.cols.tolist(), self.c.tolist(),
                                                self.u.tolist(), self.v.tolist(), self.score.tolist())]
        return {"detection": self.detection, "strategy": self.strategy, "k": self.k, "labels": labels}

    @classmethod
    def from_json(cls, obj):
        try:
            labels = obj["labels"]
            cols = {key: [lab[key] for lab in labels] for key in ("row", "col", "c", "u", "v", "score")}
            out = cls(obj["detection"], obj["strategy"], obj["k"],
                      np.array(cols["row"], dtype=np.int64), np.array(cols["col"], dtype=np.int64),
                      np.array(cols["c"], dtype=np.int64), np.array(cols["u"], dtype=np.float64),
                      np.array(cols["v"], dtype=np.float64), np.array(cols["score"], dtype=np.float64))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed pseudo-label set: {exc}") from None
        if out.strategy not in STRATEGIES:
            raise ValidationError(f"unknown strategy {out.strategy!r}")
        return out


def filter_detections(records, tau=DEFAULT_TAU):
    """Keep records with ``score >= tau``, in input order."""
    if not 0.0 <= tau <= 1.0:
        raise ValidationError(f"tau must be in [0, 1], got {tau}")
    return [r for r in records if r.score >= tau]


def candidate_pool(record):
    """Flat row-major indices of pixels whose part argmax is a body chart."""
    best = np.argmax(record.part_posterior, axis=0)
    return np.flatnonzero(best.ravel() != BACKGROUND)


def selection_scores(record, strategy, uv_combine="sum_var"):
    """Per-pixel ranking score for the ranked strategies (higher is better)."""
    if strategy == "mask":
        return record.fg_posterior.ravel()
    if strategy == "part":
        return record.part_posterior[1:].max(axis=0).ravel()
    if strategy == "uv":
        su, sv = record.uv_sigma
        if uv_combine == "sum_var":
            spread = su * su + sv * sv
        elif uv_combine == "max":
            spread = np.maximum(su, sv)
        elif uv_combine == "mean":
            spread = 0.5 * (su + sv)
        else:
            raise ValidationError(f"unknown uv combination {uv_combine!r}; choose from {UV_COMBINE}")
        return -spread.ravel()
    raise ValidationError(f"strategy {strategy!r} has no ranking score")


def sample_pixels(record, strategy, k=DEFAULT_K, seed=0, uv_combine="sum_var"):
    """Select at most ``k`` labelled pixels from one detection.

    ``seed`` (an int or sequence of ints) only matters for ``uniform``.
    Returns labels ordered by non-increasing selection score; the uniform
    strategy gives every pool pixel the score ``1 / pool size`` and lists
    its picks in row-major order.
    """
    if strategy not in STRATEGIES:
        raise ValidationError(f"unknown strategy {strategy!r}; choose from {STRATEGIES}")
    if not isinstance(k, (int, np.integer)) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    pool = candidate_pool(record)
    if len(pool) == 0:
        return PseudoLabelSet(record.id, strategy, int(k))

    if strategy == "uniform":
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(pool, size=min(k, len(pool)), replace=False))
        scores = np.full(len(chosen), 1.0 / len(pool))
    else:
        s = selection_scores(record, strategy, uv_combine)[pool]
        # stable sort keeps row-major order among equal scores
        order = np.argsort(-s, kind="stable")[:k]
        chosen = pool[order]
        scores = s[order]

    h, w = record.shape
    rows, cols = np.divmod(chosen, w)
    charts = np.argmax(record.part_posterior, axis=0).ravel()[chosen]
    return PseudoLabelSet(
        record.id, strategy, int(k), rows.astype(np.int64), cols.astype(np.int64),
        charts.astype(np.int64), record.uv[0].ravel()[chosen], record.uv[1].ravel()[chosen],
        scores.astype(np.float64))


def build_dataset(records, strategy, k=DEFAULT_K, tau=DEFAULT_TAU, seed=0, uv_combine="sum_var"):
    """Filter detections and sample pseudo-labels from each survivor.

    Record ``i`` of the input draws from the stream seeded with
    ``(seed, i)``, so results do not depend on processing order.
    Returns ``(label_sets, manifest)``.
    """
    kept = filter_detections(records, tau)
    sets = [sample_pixels(r, strategy, k, seed=(seed, i), uv_combine=uv_combine)
            for i, r in enumerate(records) if r.score >= tau]
    manifest = {
        "strategy": strategy,
        "k": int(k),
        "tau": float(tau),
        "seed": int(seed),
        "uv_combine": uv_combine,
        "n_detections": len(records),
        "n_kept": len(kept),
        "n_filtered": len(records) - len(kept),
        "n_labels": int(sum(len(s) for s in sets)),
    }
    return sets, manifest


# --- files -------------------------------------------------------------------

TENSOR_KEYS = ("fg", "part", "uv", "uv_sigma")


def load_detections(manifest_path, sigma_min=DEFAULT_SIGMA_MIN):
    """Read a detection manifest; tensor paths are relative to the manifest."""
    base = os.path.dirname(os.path.abspath(manifest_path))
    with open(manifest_path) as f:
        doc = json.load(f)
    if not isinstance(doc, dict) or not isinstance(doc.get("detections"), list):
        raise ValidationError('detection manifest must be {"detections": [...]}')
    records = []
    for entry in doc["detections"]:
        try:
            det_id, box, score, tensors = entry["id"], entry["box"], entry["score"], entry["tensors"]
            paths = [tensors[key] for key in TENSOR_KEYS]
        except (KeyError, TypeError):
            raise ValidationError(f"malformed detection entry {entry!r}") from None
        fg, part, uv, sig = (read_tensor(os.path.join(base, p)) for p in paths)
        records.append(DetectionRecord(det_id, tuple(box), score, fg, part, uv, sig, sigma_min))
    return records


def save_detections(records, directory, name="detections.json", dtype=np.float64):
    """Write each record's tensors plus a manifest into ``directory``; returns the manifest path."""
    os.makedirs(directory, exist_ok=True)
    entries = []
    for r in records:
        tensors = {}
        for key, arr in zip(TENSOR_KEYS, (r.fg_posterior, r.part_posterior, r.uv, r.uv_sigma)):
            fname = f"det{r.id}_{key}.dpt"
            write_tensor(arr, os.path.join(directory, fname), dtype=dtype)
            tensors[key] = fname
        entries.append({"id": r.id, "box": list(r.box), "score": r.score, "tensors": tensors})
    path = os.path.join(directory, name)
    with open(path, "w") as f:
        json.dump({"detections": entries}, f, indent=1)
    return path


def dump_label_sets(sets):
    return json.dumps([s.to_json() for s in sets], sort_keys=True)


def save_label_sets(sets, path, manifest=None):
    """Write label sets as a JSON array; the run manifest goes to ``<path>.manifest.json``."""
    with open(path, "w") as f:
        f.write(dump_label_sets(sets))
    if manifest is not None:
        with open(f"{path}.manifest.json", "w") as f:
            json.dump(manifest, f, sort_keys=True)


def load_label_sets(path):
    with open(path) as f:
        doc = json.load(f)
    if not isinstance(doc, list):
        raise ValidationError("pseudo-label file must hold a JSON array")
    return [PseudoLabelSet.from_json(obj) for obj in doc]
