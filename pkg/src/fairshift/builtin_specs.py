"""Named synthetic families bundled with the CLI and used by the test
suite. All are two-group, two-label mixtures with monotone (or deliberately
non-monotone) conditional curves.

The four-cell constructions share equal-scale truncated Gaussians at
locations low < mid = mid < high. Ordered locations make both P(y=1|x) and
P(g=1|x) monotone increasing; the two mid-cell weights steer where each
curve crosses its base rate, which is what separates a selective family
(group crossing left of label crossing) from its mirror.
"""

from .core import CellSpec, SyntheticSpec
from .linear_lab import LogisticLink, MonotoneIndexSpec

_LOCS = (0.2, 0.5, 0.5, 0.8)
_SCALE = 0.18


def crossing_mixture(
    mid_group_weight: float,
    mid_label_weight: float,
    sample_size: int,
    seed: int,
    locations: tuple[float, float, float, float] = _LOCS,
    scale: float = _SCALE,
) -> SyntheticSpec:
    """1-D four-cell mixture with monotone conditionals.

    mid_group_weight is the mass of the (g=1, y=0) cell at the middle
    location; mid_label_weight the mass of (g=0, y=1) there. Raising the
    former pulls the group curve's crossing left; raising the latter pulls
    the label curve's crossing left.
    """
    rest = (1.0 - mid_group_weight - mid_label_weight) / 2.0
    lo, mid_g, mid_y, hi = locations
    return SyntheticSpec(
        cells={
            (0, 0): CellSpec(rest, (lo,), (scale,)),
            (1, 0): CellSpec(mid_group_weight, (mid_g,), (scale,)),
            (0, 1): CellSpec(mid_label_weight, (mid_y,), (scale,)),
            (1, 1): CellSpec(rest, (hi,), (scale,)),
        },
        sample_size=sample_size,
        seed=seed,
    )


def figure1_top(sample_size: int = 5000, seed: int = 0) -> SyntheticSpec:
    """Group crossing left of label crossing: the fair threshold lands above
    the base one and manipulation reverses their fairness."""
    return crossing_mixture(0.25, 0.10, sample_size, seed)


def figure1_bottom(sample_size: int = 5000, seed: int = 0) -> SyntheticSpec:
    """Mirror of figure1_top: group crossing right of label crossing."""
    return crossing_mixture(0.10, 0.25, sample_size, seed)


def bimodal_group(sample_size: int = 5000, seed: int = 0) -> SyntheticSpec:
    """Group-1 mass at both ends of the feature, so P(g=1|x) crosses its
    base rate more than once."""
    return SyntheticSpec(
        cells={
            (0, 0): CellSpec(0.25, (0.45,), (0.15,)),
            (1, 0): CellSpec(0.25, (0.12,), (0.10,)),
            (0, 1): CellSpec(0.25, (0.55,), (0.15,)),
            (1, 1): CellSpec(0.25, (0.88,), (0.10,)),
        },
        sample_size=sample_size,
        seed=seed,
    )


def single_group(sample_size: int = 1000, seed: int = 0) -> SyntheticSpec:
    """Everyone in group 1: group-conditioned metrics are undefined."""
    return SyntheticSpec(
        cells={
            (0, 0): CellSpec(0.0, (0.3,), (0.15,)),
            (1, 0): CellSpec(0.5, (0.3,), (0.15,)),
            (0, 1): CellSpec(0.0, (0.7,), (0.15,)),
            (1, 1): CellSpec(0.5, (0.7,), (0.15,)),
        },
        sample_size=sample_size,
        seed=seed,
    )


def aligned_index_3d(sample_size: int = 5000, seed: int = 0) -> MonotoneIndexSpec:
    """Three features, label and group both monotone in the same direction,
    group crossing earlier: the advantaged-aligned multivariate family."""
    return MonotoneIndexSpec(
        v_y=(1.0, 1.0, 1.0),
        v_g=(1.0, 1.0, 1.0),
        link_y=LogisticLink(6.0, 1.8),
        link_g=LogisticLink(6.0, 1.35),
        sample_size=sample_size,
        seed=seed,
        advantaged_aligned=True,
    )


BUILTIN_SPECS = {
    "figure1_top": figure1_top,
    "figure1_bottom": figure1_bottom,
    "bimodal_group": bimodal_group,
    "single_group": single_group,
    "aligned_index_3d": aligned_index_3d,
}
