"""Lattice protein folding: exhaustive search, Hamiltonians and simulated variational solvers."""

import os
from pathlib import Path

_data = Path(__file__).resolve().parent / "data"
if "QFOLD_DATA" not in os.environ and (_data / "mj1996.csv").exists():
    os.environ["QFOLD_DATA"] = str(_data)

from ._qfold import (  # noqa: E402
    QfoldError,
    build_instance,
    decode,
    kabsch_rmsd,
    probabilities,
    radius_of_gyration,
    resources,
    sample,
    search,
    term_counts,
    vqe,
    xyz,
)

__all__ = [
    "QfoldError",
    "build_instance",
    "decode",
    "kabsch_rmsd",
    "probabilities",
    "radius_of_gyration",
    "resources",
    "sample",
    "search",
    "term_counts",
    "vqe",
    "xyz",
]
