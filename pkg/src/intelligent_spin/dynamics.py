"""Rigid-rotor evolution of partial-wave packets and fractional-revival analysis.

With ``H = L**2`` in units of ``hbar**2 / 2J`` every coefficient evolves as
``b_lm(t) = b_lm * exp(-i l(l+1) omega0 t)``. Fractions ``m/n`` are taken of
the revival period ``T_rev = 2 pi / omega0``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .wavepacket import DEFAULT_GRID, AngularWavePacket, SphereGrid, density_grid

DEFAULT_THRESHOLD = 0.2
MIN_LUMP_WEIGHT = 0.01


@dataclass(frozen=True)
class EvolutionClock:
    """Rotor frequency and the revival period built from it."""

    omega0: float = 1.0

    def __post_init__(self):
        if not self.omega0 > 0:
            raise ValueError(f"omega0 must be positive, got {self.omega0}")

    @property
    def t_rev(self) -> float:
        return 2.0 * math.pi / self.omega0

    def fraction_time(self, m: int, n: int) -> float:
        check_fraction(m, n)
        return m / n * self.t_rev


def check_fraction(m: int, n: int) -> None:
    if n < 1 or m < 0:
        raise ValueError(f"fraction needs m >= 0 and n >= 1, got {m}/{n}")
    if math.gcd(m, n) != 1:
        raise ValueError(f"fraction {m}/{n} is not in lowest terms")


def expected_lump_count(n: int) -> int:
    return n if n % 2 else n // 2


def _phases(l_max: int, t: float, clock: EvolutionClock) -> np.ndarray:
    l = np.arange(l_max + 1)
    return np.exp(-1j * (l * (l + 1)) * clock.omega0 * t)


def _fraction_phases(l_max: int, m: int, n: int) -> np.ndarray:
    # exp(-2 pi i l(l+1) m / n) with the integer product reduced mod n first
    l = np.arange(l_max + 1)
    residue = (l * (l + 1) * m) % n
    return np.exp(-2j * math.pi * residue / n)


def _apply(packet: AngularWavePacket, phases: np.ndarray) -> AngularWavePacket:
    return packet.with_coeffs(packet.coeffs * phases[:, None])


def evolve(packet: AngularWavePacket, t: float, clock: EvolutionClock | None = None) -> AngularWavePacket:
    clock = clock or EvolutionClock()
    return _apply(packet, _phases(packet.l_max, t, clock))


def evolve_fraction(packet: AngularWavePacket, m: int, n: int) -> AngularWavePacket:
    """Packet at ``t = (m/n) T_rev``, with phases computed by integer arithmetic."""
    check_fraction(m, n)
    return _apply(packet, _fraction_phases(packet.l_max, m, n))


def autocorrelation(initial: AngularWavePacket, t: float, clock: EvolutionClock | None = None) -> complex:
    """``<Psi(0)|Psi(t)> = sum |b_lm|**2 exp(-i l(l+1) omega0 t)``."""
    clock = clock or EvolutionClock()
    return complex(np.dot(initial.shell_weights(), _phases(initial.l_max, t, clock)))


def _fraction_autocorrelation(initial: AngularWavePacket, m: int, n: int) -> complex:
    return complex(np.dot(initial.shell_weights(), _fraction_phases(initial.l_max, m, n)))


def _unit_vectors(thetas, phis):
    st = np.sin(thetas)[:, None]
    return np.stack(
        [st * np.cos(phis)[None, :], st * np.sin(phis)[None, :], np.broadcast_to(np.cos(thetas)[:, None], (len(thetas), len(phis)))],
        axis=-1,
    )


def angular_distance(a: tuple[float, float], b: tuple[float, float]) -> float:
    (t1, p1), (t2, p2) = a, b
    c = math.sin(t1) * math.sin(t2) * math.cos(p1 - p2) + math.cos(t1) * math.cos(t2)
    return math.acos(max(-1.0, min(1.0, c)))


def _label_sphere(mask: np.ndarray) -> tuple[np.ndarray, int]:
    """Connected components on the theta-phi lattice, wrapping in phi and merging each polar row."""
    labels, count = ndimage.label(mask, structure=np.ones((3, 3)))
    if count == 0:
        return labels, 0
    parent = list(range(count + 1))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        if a and b:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    n_theta = mask.shape[0]
    for i in range(n_theta):
        for di in (-1, 0, 1):
            j = i + di
            if 0 <= j < n_theta:
                union(labels[i, -1], labels[j, 0])
    for row in (0, n_theta - 1):
        present = np.unique(labels[row][labels[row] > 0])
        for a in present[1:]:
            union(present[0], a)

    roots = np.array([find(a) for a in range(count + 1)])
    remap = np.zeros(count + 1, dtype=int)
    for new, root in enumerate(np.unique(roots[1:]), start=1):
        remap[roots == root] = new
    remap[0] = 0
    merged = remap[labels]
    return merged, int(merged.max())


def count_lumps(grid: SphereGrid, rel_threshold: float = DEFAULT_THRESHOLD, min_weight: float = MIN_LUMP_WEIGHT):
    """Separated high-density regions of a sphere grid.

    Nodes above ``rel_threshold * max(density)`` are grouped into connected
    components (8-neighbour, periodic in phi, polar rows joined). Components
    with less than ``min_weight`` of the total probability are dropped.
    Returns ``(count, centers, weights)`` where centers are density-weighted
    mean directions ``(theta, phi)``, sorted by decreasing weight.
    """
    if not 0.0 < rel_threshold < 1.0:
        raise ValueError(f"rel_threshold must be in (0, 1), got {rel_threshold}")
    density = grid.density
    peak = float(density.max())
    if peak <= 0.0:
        return 0, [], []
    labels, count = _label_sphere(density >= rel_threshold * peak)
    mass = density * grid.weights
    total = float(mass.sum())
    vectors = _unit_vectors(grid.thetas, grid.phis)
    found = []
    for lab in range(1, count + 1):
        sel = labels == lab
        w = float(mass[sel].sum())
        if w < min_weight * total:
            continue
        mean = (vectors[sel] * mass[sel][:, None]).sum(axis=0)
        mean /= np.linalg.norm(mean)
        theta = math.acos(max(-1.0, min(1.0, float(mean[2]))))
        phi = math.atan2(float(mean[1]), float(mean[0])) % (2.0 * math.pi)
        found.append((w / total, (theta, phi)))
    found.sort(key=lambda item: -item[0])
    return len(found), [c for _, c in found], [w for w, _ in found]


def lump_radius(grid: SphereGrid, rel_threshold: float = DEFAULT_THRESHOLD) -> float:
    """Angular radius of the cap with the same solid angle as the largest lump."""
    density = grid.density
    labels, count = _label_sphere(density >= rel_threshold * density.max())
    if count == 0:
        return 0.0
    areas = [float(grid.weights[labels == lab].sum()) for lab in range(1, count + 1)]
    omega = max(areas)
    return math.acos(max(-1.0, 1.0 - omega / (2.0 * math.pi)))


def min_separation(centers) -> float:
    if len(centers) < 2:
        return math.nan
    return min(
        angular_distance(a, b) for i, a in enumerate(centers) for b in centers[i + 1 :]
    )


def lump_peaks(grid: SphereGrid, rel_threshold: float = DEFAULT_THRESHOLD) -> list[float]:
    """Peak density of every thresholded component, largest component first."""
    density = grid.density
    labels, count = _label_sphere(density >= rel_threshold * density.max())
    mass = density * grid.weights
    comps = []
    for lab in range(1, count + 1):
        sel = labels == lab
        comps.append((float(mass[sel].sum()), float(density[sel].max())))
    comps.sort(key=lambda c: -c[0])
    return [p for _, p in comps]


@dataclass(frozen=True)
class RevivalReport:
    time: float
    autocorr: complex
    lump_count: int
    lump_centers: list = field(default_factory=list)
    lump_weights: list = field(default_factory=list)
    m: int | None = None
    n: int | None = None
    expected: int | None = None

    @property
    def min_separation(self) -> float:
        return min_separation(self.lump_centers)

    def to_dict(self) -> dict:
        return {
            "t": self.time,
            "m": self.m,
            "n": self.n,
            "autocorr_re": self.autocorr.real,
            "autocorr_im": self.autocorr.imag,
            "lump_count": self.lump_count,
            "lumps": [
                {"theta": c[0], "phi": c[1], "weight": w}
                for c, w in zip(self.lump_centers, self.lump_weights)
            ],
        }


def snapshot(
    initial: AngularWavePacket,
    t: float,
    clock: EvolutionClock | None = None,
    grid_spec: tuple[int, int] = DEFAULT_GRID,
    rel_threshold: float = DEFAULT_THRESHOLD,
) -> tuple[RevivalReport, SphereGrid]:
    """Report and density grid at an absolute time ``t``."""
    clock = clock or EvolutionClock()
    grid = density_grid(evolve(initial, t, clock), *grid_spec)
    count, centers, weights = count_lumps(grid, rel_threshold)
    report = RevivalReport(t, autocorrelation(initial, t, clock), count, centers, weights)
    return report, grid


def fractional_snapshot(
    initial: AngularWavePacket,
    m: int,
    n: int,
    clock: EvolutionClock | None = None,
    grid_spec: tuple[int, int] = DEFAULT_GRID,
    rel_threshold: float = DEFAULT_THRESHOLD,
    return_grid: bool = False,
):
    """Evolve to ``(m/n) T_rev``, grid the density and count the fractional packets."""
    clock = clock or EvolutionClock()
    t = clock.fraction_time(m, n)
    grid = density_grid(evolve_fraction(initial, m, n), *grid_spec)
    count, centers, weights = count_lumps(grid, rel_threshold)
    report = RevivalReport(
        time=t,
        autocorr=_fraction_autocorrelation(initial, m, n),
        lump_count=count,
        lump_centers=centers,
        lump_weights=weights,
        m=m,
        n=n,
        expected=expected_lump_count(n),
    )
    return (report, grid) if return_grid else report


def coprime_fractions(n_max: int) -> list[tuple[int, int]]:
    return [(m, n) for n in range(1, n_max + 1) for m in range(n) if math.gcd(m, n) == 1]


def revival_scan(
    initial: AngularWavePacket,
    n_max: int,
    clock: EvolutionClock | None = None,
    grid_spec: tuple[int, int] = DEFAULT_GRID,
    rel_threshold: float = DEFAULT_THRESHOLD,
    workers: int = 1,
) -> list[RevivalReport]:
    """Snapshots at every coprime ``m/n`` with ``2 <= n <= n_max`` and ``1 <= m < n``."""
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    fractions = [(m, n) for m, n in coprime_fractions(n_max) if n >= 2]

    def run(frac):
        return fractional_snapshot(initial, frac[0], frac[1], clock, grid_spec, rel_threshold)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, fractions))
    return [run(f) for f in fractions]
