"""Quadratic forms, random unimodular lattices and Siegel-transform statistics."""

__version__ = "0.1.0"

from .forms import QuadraticForm, deform, evaluate, gradient, random_form, standard_form
from .lattice import Lattice, LatticeSampler, from_basis, gaussian_unimodular, goldstein_mayer, lll_reduce
from .enumeration import (Ball, Box, Dilate, Empty, QuadShell, Region, count_form_values, count_region,
                          min_height_solution, points_in_ball)
from .siegel import (SampleStats, c_n, concentration_tail, hole_probability, mean_variance,
                     siegel_transform, symmetrization_radius)
from .volume import VolumeEstimate, ball_volume, c_p_surface, c_q_estimate, mc_volume, shell_volume

__all__ = [
    "QuadraticForm", "deform", "evaluate", "gradient", "random_form", "standard_form",
    "Lattice", "LatticeSampler", "from_basis", "gaussian_unimodular", "goldstein_mayer", "lll_reduce",
    "Ball", "Box", "Dilate", "Empty", "QuadShell", "Region", "count_form_values", "count_region",
    "min_height_solution", "points_in_ball",
    "SampleStats", "c_n", "concentration_tail", "hole_probability", "mean_variance", "siegel_transform",
    "symmetrization_radius",
    "VolumeEstimate", "ball_volume", "c_p_surface", "c_q_estimate", "mc_volume", "shell_volume",
]
