"""Rank source classes by transfer score and cut top-n training subsets."""
import json
import math
from dataclasses import dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class ClassScoreTable:
    entries: tuple  # of (name, ap)

    def __post_init__(self):
        entries = tuple((str(name), float(ap)) for name, ap in self.entries)
        names = [n for n, _ in entries]
        if len(set(names)) != len(names):
            raise ValidationError("class names must be unique")
        for name, ap in entries:
            if not math.isfinite(ap) or ap < 0:
                raise ValidationError(f"class {name!r}: score must be finite and >= 0, got {ap}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_dict(cls, scores):
        return cls(tuple(scores.items()))


def rank_classes(table):
    """Class names by decreasing score; equal scores in ascending name order."""
    if not table.entries:
        raise ValidationError("cannot rank an empty class table")
    return [name for name, _ in sorted(table.entries, key=lambda e: (-e[1], e[0]))]


def top_n_subset(ranked, n):
    if not isinstance(n, int) or not 1 <= n <= len(ranked):
        raise ValidationError(f"n must be in 1..{len(ranked)}, got {n!r}")
    return {"subset": list(ranked[:n]), "n": n}


def table_from_json(obj):
    try:
        entries = [(c["name"], c["ap"]) for c in obj["classes"]]
    except (KeyError, TypeError):
        raise ValidationError('class table must be {"classes": [{"name": str, "ap": float}, ...]}') from None
    for name, ap in entries:
        if not isinstance(name, str) or isinstance(ap, bool) or not isinstance(ap, (int, float)):
            raise ValidationError(f"bad class entry {name!r}: {ap!r}")
    return ClassScoreTable(tuple(entries))


def table_to_json(table):
    return {"classes": [{"name": n, "ap": ap} for n, ap in table.entries]}


def subset_from_json(obj):
    try:
        subset, n = obj["subset"], obj["n"]
    except (KeyError, TypeError):
        raise ValidationError('subset manifest must be {"subset": [...], "n": int}') from None
    if not isinstance(subset, list) or not all(isinstance(s, str) for s in subset):
        raise ValidationError('"subset" must be a list of class names')
    if not isinstance(n, int) or isinstance(n, bool) or n != len(subset):
        raise ValidationError(f'"n" must equal the subset size {len(subset)}')
    return {"subset": subset, "n": n}


def load_table(path):
    with open(path) as f:
        return table_from_json(json.load(f))


def save_subset(manifest, path):
    with open(path, "w") as f:
        json.dump(manifest, f)
