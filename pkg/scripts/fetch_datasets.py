#!/usr/bin/env python3
"""Pointers for assembling the optional real-data directory.

No canonical pinned distribution exists for these datasets, so this script
does not download anything; it prints where to obtain each one and the
columns the manifest in docs/datasets.md expects.
"""

DATASETS = [
    {
        "name": "compas",
        "source": "ProPublica COMPAS analysis repository (compas-scores-two-years.csv)",
        "notes": "binarize race to the two largest groups; label 1 = no recidivism "
        "within two years; keep the ordinal count features",
    },
    {
        "name": "lawschool",
        "source": "LSAC National Longitudinal Bar Passage Study export",
        "notes": "label 1 = passed the bar; group from the binary race column; "
        "keep lsat/ugpa/zfygpa/zgpa",
    },
    {
        "name": "communities",
        "source": "UCI Communities and Crime (normalized)",
        "notes": "label 1 = violent crime rate below the median; group from the "
        "majority-race indicator; pick four ordinal features with clear "
        "label correlation",
    },
]


def main() -> None:
    print("Assemble $FAIRSHIFT_DATA_DIR manually (no pinned upstream exists):\n")
    for d in DATASETS:
        print(f"  {d['name']}.csv")
        print(f"    source: {d['source']}")
        print(f"    prep:   {d['notes']}\n")
    print("Then write manifest.json and preprocess per docs/datasets.md:")
    print("  - group/label columns binary 0/1 (1 = advantaged / desirable)")
    print("  - feature columns numeric; scaling and orientation are handled by the pipeline")


if __name__ == "__main__":
    main()
