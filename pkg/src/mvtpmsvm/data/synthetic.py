"""
Seeded generators for the three synthetic two-view benchmarks.

Each benchmark pairs two 2-D shapes that share labels row by row:

- ``synthetic1``: concentric circles (view A) and a double vortex (view B)
- ``synthetic2``: Gaussian clouds (view A) and a checkerboard (view B)
- ``synthetic3``: a double square band (view A) and a double moon (view B)
"""

import logging
from dataclasses import asdict, dataclass

import numpy as np

from mvtpmsvm.data.dataset import TwoViewDataset
from mvtpmsvm.exceptions import InvalidArgumentError

log = logging.getLogger(__name__)

SYNTHETIC_NAMES = ("synthetic1", "synthetic2", "synthetic3")


@dataclass(frozen=True)
class SyntheticConfig:
    """
    Shape constants of the synthetic generators.

    Attributes:
        circle_radii (tuple): Radii of the positive and negative circle.
        circle_noise (float): Standard deviation of the radial noise.
        vortex_turns (float): Number of turns of each spiral arm.
        vortex_radius (tuple): Start and end radius of each arm.
        vortex_noise (float): Standard deviation of the isotropic noise.
        cloud_center (float): The clouds sit at (+center, 0) and (-center, 0).
        cloud_variance (float): Per-axis variance of each cloud.
        checker_cells (int): Cells per side of the checkerboard.
        checker_cell_size (float): Side length of one cell.
        moon_radius (float): Radius of each moon.
        moon_width (float): Radial thickness of each moon.
        moon_offset (float): Vertical drop of the lower moon.
        band_length (float): Horizontal extent of each band.
        band_width (float): Vertical thickness of each band.
        band_offset (float): Vertical distance between the band centers.
    """

    circle_radii: tuple = (1.0, 2.0)
    circle_noise: float = 0.1
    vortex_turns: float = 1.5
    vortex_radius: tuple = (0.5, 2.0)
    vortex_noise: float = 0.1
    cloud_center: float = 1.5
    cloud_variance: float = 0.5
    checker_cells: int = 2
    checker_cell_size: float = 1.0
    moon_radius: float = 1.0
    moon_width: float = 0.6
    moon_offset: float = 0.4
    band_length: float = 4.0
    band_width: float = 0.5
    band_offset: float = 1.5

    def to_dict(self) -> dict:
        return asdict(self)


def concentric_circles(rng: np.random.Generator, half: int, config: SyntheticConfig):
    """Positive class on the inner circle, negative class on the outer one."""
    classes = []
    for radius in config.circle_radii:
        angle = rng.uniform(0.0, 2.0 * np.pi, half)
        r = radius + rng.normal(0.0, config.circle_noise, half)
        classes.append(np.column_stack([r * np.cos(angle), r * np.sin(angle)]))
    return classes[0], classes[1]


def double_vortex(rng: np.random.Generator, half: int, config: SyntheticConfig):
    """Two interleaved Archimedean spirals, the second rotated by half a turn."""
    r_start, r_end = config.vortex_radius
    classes = []
    for arm in range(2):
        t = rng.uniform(0.0, 1.0, half)
        angle = 2.0 * np.pi * config.vortex_turns * t + arm * np.pi
        r = r_start + (r_end - r_start) * t
        points = np.column_stack([r * np.cos(angle), r * np.sin(angle)])
        classes.append(points + rng.normal(0.0, config.vortex_noise, (half, 2)))
    return classes[0], classes[1]


def gaussian_clouds(rng: np.random.Generator, half: int, config: SyntheticConfig):
    covariance = config.cloud_variance * np.eye(2)
    positive = rng.multivariate_normal([config.cloud_center, 0.0], covariance, half)
    negative = rng.multivariate_normal([-config.cloud_center, 0.0], covariance, half)
    return positive, negative


def checkerboard(rng: np.random.Generator, half: int, config: SyntheticConfig):
    """Alternating cells; the cell at the origin belongs to the positive class."""
    cells = np.array([(i, j) for i in range(config.checker_cells) for j in range(config.checker_cells)])
    parity = cells.sum(axis=1) % 2
    classes = []
    for wanted in (0, 1):
        owned = cells[parity == wanted]
        picks = owned[rng.integers(0, owned.shape[0], half)]
        classes.append((picks + rng.uniform(0.0, 1.0, (half, 2))) * config.checker_cell_size)
    return classes[0], classes[1]


def double_moon(rng: np.random.Generator, half: int, config: SyntheticConfig):
    """Upper moon around the origin, lower moon shifted right by the radius and dropped by the offset."""
    radius, width = config.moon_radius, config.moon_width

    def arc():
        angle = rng.uniform(0.0, np.pi, half)
        r = radius + rng.uniform(-width / 2.0, width / 2.0, half)
        return r * np.cos(angle), r * np.sin(angle)

    x, y = arc()
    upper = np.column_stack([x, y])
    x, y = arc()
    lower = np.column_stack([radius + x, -config.moon_offset - y])
    return upper, lower


def double_square(rng: np.random.Generator, half: int, config: SyntheticConfig):
    """Two horizontal bands; the negative band lies ``band_offset`` above the positive one."""
    classes = []
    for shift in (0.0, config.band_offset):
        x = rng.uniform(0.0, config.band_length, half)
        y = shift + rng.uniform(-config.band_width / 2.0, config.band_width / 2.0, half)
        classes.append(np.column_stack([x, y]))
    return classes[0], classes[1]


GENERATORS = {
    "synthetic1": (concentric_circles, double_vortex),
    "synthetic2": (gaussian_clouds, checkerboard),
    "synthetic3": (double_square, double_moon),
}


def generate_synthetic(name: str, n: int, seed: int = 0, config: SyntheticConfig = None) -> TwoViewDataset:
    """
    Generate a balanced synthetic two-view dataset.

    Args:
        name (str): ``synthetic1``, ``synthetic2`` or ``synthetic3``.
        n (int): Total number of samples, even and at least 4.
        seed (int, optional): Seed of every random draw. Defaults to 0.
        config (SyntheticConfig, optional): Shape constants. Defaults to ``SyntheticConfig()``.

    Returns:
        TwoViewDataset: n rows, n/2 per class, with two 2-D views.

    Raises:
        InvalidArgumentError: If the name is unknown or n is odd or below 4.
    """
    if name not in GENERATORS:
        raise InvalidArgumentError(f"Unknown synthetic dataset {name!r}. Allowed values are: {', '.join(SYNTHETIC_NAMES)}")
    if n < 4 or n % 2:
        raise InvalidArgumentError(f"n must be an even number of at least 4, got {n}")
    config = config or SyntheticConfig()

    rng = np.random.default_rng(seed)
    half = n // 2
    make_a, make_b = GENERATORS[name]
    positive_a, negative_a = make_a(rng, half, config)
    positive_b, negative_b = make_b(rng, half, config)
    labels = np.concatenate([np.ones(half, dtype=int), -np.ones(half, dtype=int)])
    order = rng.permutation(n)

    log.debug("Generated %s with %s samples from seed %s", name, n, seed)
    return TwoViewDataset(
        view_a=np.vstack([positive_a, negative_a])[order],
        view_b=np.vstack([positive_b, negative_b])[order],
        labels=labels[order],
        name=name,
        label_names={1: "1", -1: "-1"},
        provenance={"generator": name, "n": n, "seed": seed, "config": config.to_dict()},
    )
