"""
Choosing which source classes to pre-train on
=============================================

Given one transfer score per source class (e.g. the mask AP each
single-class model gets on the target species), rank classes and emit
nested top-n training subsets.
"""
from dptransfer.classes import ClassScoreTable, rank_classes, top_n_subset

# made-up scores that follow a plausible ordering
scores = {"person": 18.0, "bear": 41.0, "dog": 35.5, "cat": 30.2, "elephant": 33.0,
          "horse": 28.9, "sheep": 17.5, "cow": 25.1, "bird": 19.3, "zebra": 12.0,
          "giraffe": 10.4, "mouse": 4.2, "car": 1.1}

ranked = rank_classes(ClassScoreTable.from_dict(scores))
print("ranking:", ranked)
for n in (1, 3, 9):
    print(n, top_n_subset(ranked, n)["subset"])
