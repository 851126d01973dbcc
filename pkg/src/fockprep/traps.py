"""1D trapping potentials and their dimensionless parameterization.

Units: hbar^2/2m = 1 throughout, so energies are 1/length^2.  Each trap
shape is labeled by a dimensionless depth U that is invariant under the
rescaling (V, L) -> (s^2 V, L/s); traps sharing U (and relative smoothness
sigma/L) have identical spectra in units of 1/L^2.

Conventions for U:

* square well / bathtub:  U = V * (2L)^2   (full width enters squared)
* inverted Gaussian:      U = V * L^2      (L plays the role of the width
  parameter delta)

The square-well convention is calibrated so that a well with U = (C*pi)^2
supports C bound states.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class TrapShape(enum.Enum):
    BATHTUB = "bathtub"
    INVERTED_GAUSSIAN = "gaussian"
    SQUARE_WELL = "square"


@dataclass(frozen=True)
class TrapSpec:
    """A 1D trap: shape, depth V > 0, half-width L > 0, smoothness sigma.

    sigma > 0 is allowed only for the bathtub shape; the square well is the
    sigma -> 0 limit of the bathtub and is kept as an explicit variant so
    that tanh((|x|-L)/sigma) is never evaluated at sigma = 0.
    """

    shape: TrapShape
    depth: float
    half_width: float
    smoothness: float = 0.0

    def __post_init__(self):
        # depth 0 is tolerated as a degenerate empty trap (capacity 0)
        if not self.depth >= 0:
            raise ValueError(f"depth must be non-negative, got {self.depth}")
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.smoothness < 0:
            raise ValueError(f"smoothness must be >= 0, got {self.smoothness}")
        if self.shape is TrapShape.BATHTUB and self.smoothness == 0.0:
            raise ValueError("bathtub with smoothness 0 must be a SQUARE_WELL")
        if self.shape is not TrapShape.BATHTUB and self.smoothness != 0.0:
            raise ValueError(f"{self.shape.value} trap does not take a smoothness")

    @property
    def sigma_tilde(self) -> float:
        """Relative smoothness sigma/L."""
        return self.smoothness / self.half_width

    def to_dict(self) -> dict:
        return {
            "shape": self.shape.value,
            "depth": self.depth,
            "half_width": self.half_width,
            "smoothness": self.smoothness,
        }

    @staticmethod
    def from_dict(data: dict) -> "TrapSpec":
        """Build from keys (shape, depth, half_width, smoothness) or the
        dimensionless form (shape, U, sigma_tilde, half_width)."""
        known = {"shape", "depth", "half_width", "smoothness", "U", "sigma_tilde"}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown trap keys: {sorted(unknown)}")
        if "shape" not in data:
            raise ValueError("trap is missing required key 'shape'")
        shape = TrapShape(data["shape"])
        if "half_width" not in data:
            raise ValueError("trap is missing required key 'half_width'")
        L = float(data["half_width"])
        if "U" in data:
            if "depth" in data or "smoothness" in data:
                raise ValueError("give either (U, sigma_tilde) or (depth, smoothness), not both")
            return family_member(float(data["U"]), float(data.get("sigma_tilde", 0.0)), L, shape)
        if "depth" not in data:
            raise ValueError("trap is missing required key 'depth' (or 'U')")
        return TrapSpec(shape, float(data["depth"]), L, float(data.get("smoothness", 0.0)))


def evaluate_potential(spec: TrapSpec, x):
    """Potential energy at position(s) x; even in x and within [-V, 0].

    The square well evaluates to -V/2 exactly at |x| = L, matching the
    sigma -> 0 limit of the bathtub wall.
    """
    x = np.asarray(x, dtype=float)
    V, L = spec.depth, spec.half_width
    if spec.shape is TrapShape.SQUARE_WELL:
        r = np.abs(x)
        return np.where(r < L, -V, np.where(r == L, -V / 2.0, 0.0))
    if spec.shape is TrapShape.BATHTUB:
        return -0.5 * V * (1.0 - np.tanh((np.abs(x) - L) / spec.smoothness))
    return -V * np.exp(-(x * x) / (2.0 * L * L))


def dimensionless_depth(spec: TrapSpec) -> float:
    """Isospectral family label U; see the module docstring for conventions."""
    V, L = spec.depth, spec.half_width
    if spec.shape is TrapShape.INVERTED_GAUSSIAN:
        return V * L * L
    return 4.0 * V * L * L


def family_member(U: float, sigma_tilde: float, half_width: float, shape: TrapShape) -> TrapSpec:
    """The member of the U-family with the given half-width.

    A bathtub with sigma_tilde 0 is routed to the explicit square well.
    """
    if not U > 0:
        raise ValueError(f"U must be positive, got {U}")
    if not half_width > 0:
        raise ValueError(f"half_width must be positive, got {half_width}")
    if sigma_tilde < 0:
        raise ValueError(f"sigma_tilde must be >= 0, got {sigma_tilde}")
    if shape is TrapShape.BATHTUB and sigma_tilde == 0.0:
        shape = TrapShape.SQUARE_WELL
    if shape is not TrapShape.BATHTUB and sigma_tilde != 0.0:
        raise ValueError(f"{shape.value} trap does not take a smoothness")
    L = half_width
    if shape is TrapShape.INVERTED_GAUSSIAN:
        depth = U / (L * L)
    else:
        depth = U / (4.0 * L * L)
    return TrapSpec(shape, depth, L, sigma_tilde * L)


def energy_unit(half_width: float) -> float:
    """Reference energy pi^2/L^2 (ground level scale of a width-2L box)."""
    return math.pi ** 2 / half_width ** 2


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid with Dirichlet ends.

    Built so that x = 0 lies on the grid (n_points odd) and the spacing is
    an exact submultiple of the trap half-width, which keeps square-well
    walls on grid points.
    """

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 3:
            raise ValueError(f"grid needs at least 3 points, got {self.n_points}")
        if not self.x_max > self.x_min:
            raise ValueError("grid needs x_max > x_min")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    def points(self) -> np.ndarray:
        return self.x_min + self.spacing * np.arange(self.n_points)
