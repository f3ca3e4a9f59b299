"""Measure, integration and Fourier analysis on the space of countable labelled graphs."""

from .dyadic import DyadicValue
from .errors import GraphSpaceError
from .graphs import (EMPTY, FULL, ZERO, Ball, Cylinder, Graph, TruncatedAtom, atoms_at_depth,
                     contains_edge, cyl_intersect, cyl_to_balls, cyl_to_graph_form,
                     cyl_translate, intersect, sym_diff)
from .labelling import Edge, prefix_edges, psi, psi_inv
from .measures import (HAAR, ProbabilityAssignment, SampleBatch, atom_mass_profile,
                       ball_measure_bounds, ball_measure_haar, cylinder_measure, sample)
from .metrics import (MultWeightSequence, WeightSequence, cantor_coord, dist, heart,
                      heart2_exact, heart2_inv, norm1, norminf, normx, sorted_bijection)

__version__ = "0.1.0"

__all__ = [
    "Ball", "Cylinder", "DyadicValue", "EMPTY", "Edge", "FULL", "Graph", "GraphSpaceError",
    "HAAR", "MultWeightSequence", "ProbabilityAssignment", "SampleBatch", "TruncatedAtom",
    "WeightSequence", "ZERO", "atom_mass_profile", "atoms_at_depth", "ball_measure_bounds",
    "ball_measure_haar", "cantor_coord", "contains_edge", "cyl_intersect", "cyl_to_balls",
    "cyl_to_graph_form", "cyl_translate", "cylinder_measure", "dist", "heart", "heart2_exact",
    "heart2_inv", "intersect", "norm1", "norminf", "normx", "prefix_edges", "psi", "psi_inv",
    "sample", "sorted_bijection", "sym_diff",
]
