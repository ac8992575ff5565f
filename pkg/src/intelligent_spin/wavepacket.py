"""Exponential coherent packets on the sphere and their raised family.

The parent packet is

    Psi(theta, phi) = C * exp(N * v),   v = sin(theta) * (cos(phi) + i*eta*sin(phi)),

which is annihilated by ``Lx + i*eta*Ly``. Repeated application of the
deformed raising generator gives packets with eigenvalue ``k*sqrt(1-eta**2)``.
Packets are stored as partial-wave tables ``b[l, m + l_max]``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import angular_core as ac
from .errors import AmplitudeOverflowError, EmptyPacketError, SingularEtaError, TruncationError
from .intelligent_states import (
    SqueezeParameter,
    UncertaintyReport,
    as_eta,
    block_moments,
    build_nonnormal_operator,
    su2_generators,
)

DEFAULT_TAIL_TOL = 1e-12
SHELL_TOL = 1e-14
DEFAULT_GRID = (181, 360)


def _log_sinh(x: float) -> float:
    # ln(sinh x) for x > 0 without overflow
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0)


def _stretch(eta: SqueezeParameter) -> float:
    # |exp(N v)|^2 = exp(2 N s cos(gamma)) about the direction (1, -Im eta, 0)
    return math.hypot(1.0, eta.eta.imag)


def parent_log_prefactor(N: float, eta) -> float:
    """ln of the normalization constant of ``exp(N v)`` on the unit sphere."""
    s = _stretch(as_eta(eta))
    return 0.5 * (math.log(N * s) - math.log(2.0 * math.pi) - _log_sinh(2.0 * N * s))


def parent_amplitude(N: float, eta, theta, phi, log_space: bool | None = None):
    """Closed-form parent amplitude at ``(theta, phi)`` (arrays broadcast).

    For real ``eta`` the prefactor is ``sqrt(N / (2 pi sinh 2N))``. A complex
    ``eta`` stretches the modulus of ``exp(N v)`` by ``s = sqrt(1 + Im(eta)**2)``
    and the prefactor becomes ``sqrt(N s / (2 pi sinh 2 N s))``.

    ``log_space`` defaults to True for ``N > 100``. With ``log_space=False``
    the prefactor and exponential are formed separately, which overflows
    once ``e**N`` does.
    """
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    p = as_eta(eta)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    v = np.sin(theta) * (np.cos(phi) + 1j * p.eta * np.sin(phi))
    if log_space is None:
        log_space = N > 100
    if log_space:
        return np.exp(parent_log_prefactor(N, p) + N * v)
    if N > 350:
        raise AmplitudeOverflowError(
            f"exp(N) overflows for N={N}; evaluate with log_space=True"
        )
    s = _stretch(p)
    return math.sqrt(N * s / (2.0 * math.pi * math.sinh(2.0 * N * s))) * np.exp(N * v)


@dataclass(frozen=True)
class AngularWavePacket:
    """Partial-wave table ``coeffs[l, m + l_max]`` of a packet on the sphere.

    Entries with ``|m| > l`` are zero. ``tail_weight`` estimates the norm
    left out above ``l_max``; ``prefactor`` is the overall constant that
    made the parent table unit norm.
    """

    l_max: int
    coeffs: np.ndarray = field(repr=False)
    N: float
    eta: SqueezeParameter
    k: int = 0
    tail_weight: float = 0.0
    prefactor: float | None = None

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (self.l_max + 1, 2 * self.l_max + 1):
            raise ValueError(f"coeffs shape {c.shape} does not match l_max={self.l_max}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "eta", as_eta(self.eta))

    def block(self, l: int) -> np.ndarray:
        return self.coeffs[l, self.l_max - l : self.l_max + l + 1]

    def blocks(self):
        for l in range(self.l_max + 1):
            yield l, self.block(l)

    def coefficient(self, l: int, m: int) -> complex:
        return complex(self.coeffs[l, m + self.l_max])

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def shell_weights(self) -> np.ndarray:
        return np.sum(np.abs(self.coeffs) ** 2, axis=1)

    def moments(self) -> UncertaintyReport:
        return block_moments(self.blocks())

    def with_coeffs(self, coeffs: np.ndarray, **changes) -> "AngularWavePacket":
        return replace(self, coeffs=coeffs, **changes)


def _pack(blocks: dict[int, np.ndarray], l_max: int) -> np.ndarray:
    table = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    for l, c in blocks.items():
        table[l, l_max - l : l_max + l + 1] = c
    return table


def _raw_parent_table(N: float, eta: SqueezeParameter, l_top: int) -> tuple[np.ndarray, float]:
    """Unnormalized table for ``l <= l_top`` and the log of the real-eta prefactor.

    Double sum over (l1, l2) with m = l1 - l2 of
    ``(-1)**l1 (N(1+eta))**l1 (N(1-eta))**l2 / sqrt((2l1)!(2l2)!)
    * <l1 l2 0 0|l 0><l1 l2 l1 -l2|l m> / sqrt(2l+1)``.
    The sign (-1)**l1 belongs to Condon-Shortley harmonics.
    """
    a = N * (1.0 + eta.eta)
    b = N * (1.0 - eta.eta)
    log_pref = 0.5 * (math.log(2.0 * N) - _log_sinh(2.0 * N))

    def series(z: complex):
        # log-magnitudes and phases of z**n / sqrt((2n)!) up to negligible size
        if z == 0:
            return np.zeros(1), np.ones(1, dtype=complex)
        log_z = cmath.log(z)
        n = np.arange(0, 4 * l_top + 64)
        log_mag = n * log_z.real - 0.5 * ac._log_factorial_array(2 * n)
        keep = log_mag >= log_mag.max() - 60.0
        last = int(np.nonzero(keep)[0][-1]) + 1
        n = n[:last]
        return log_mag[:last], np.exp(1j * n * log_z.imag)

    mag1, ph1 = series(a)
    mag2, ph2 = series(b)
    n1 = np.arange(mag1.size)
    n2 = np.arange(mag2.size)
    g1, g2 = np.meshgrid(n1, n2, indexing="ij")
    g1 = g1.ravel()
    g2 = g2.ravel()
    lo = np.abs(g1 - g2)
    hi = np.minimum(g1 + g2, l_top)
    count = np.maximum(hi - lo + 1, 0)
    sel = count > 0
    g1, g2, lo, count = g1[sel], g2[sel], lo[sel], count[sel]
    rep1 = np.repeat(g1, count)
    rep2 = np.repeat(g2, count)
    offsets = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    l = np.repeat(lo, count) + offsets
    # <l1 l2 0 0|l 0> vanishes unless l1 + l2 + l is even
    even = (rep1 + rep2 + l) % 2 == 0
    rep1, rep2, l = rep1[even], rep2[even], l[even]
    m = rep1 - rep2

    cg0 = ac.clebsch_gordan_array(rep1, rep2, 0, 0, l, 0)
    cgs = ac.clebsch_gordan_array(rep1, rep2, rep1, -rep2, l, m)
    sign = np.where(rep1 % 2 == 0, 1.0, -1.0)
    mag = np.exp(mag1[rep1] + mag2[rep2] + log_pref)
    terms = sign * mag * ph1[rep1] * ph2[rep2] * cg0 * cgs / np.sqrt(2.0 * l + 1.0)

    table = np.zeros((l_top + 1, 2 * l_top + 1), dtype=complex)
    np.add.at(table, (l, m + l_top), terms)
    return table, log_pref


def _choose_l_max(shells: np.ndarray, tol: float) -> int | None:
    total = shells.sum()
    w = shells / total
    tail = np.cumsum(w[::-1])[::-1]  # tail[l] = weight in shells >= l
    peak = int(np.argmax(w))
    for l in range(peak, len(w) - 3):
        if tail[l + 1] < tol and np.all(w[l + 1 : l + 4] < SHELL_TOL):
            return l
    return None


def parent_coefficients(N: float, eta, l_max: int | None = None, tol: float = DEFAULT_TAIL_TOL) -> AngularWavePacket:
    """Partial-wave table of the exponential parent packet.

    Without ``l_max`` the table is cut at the smallest ``l`` beyond which the
    weight is below ``tol`` and the next three shells are each below 1e-14.
    With an explicit ``l_max``, a tail above ``tol`` raises
    :class:`TruncationError`.

    The table is renormalized to unit norm; for real ``eta`` this is a
    no-op up to the truncated tail, for complex ``eta`` it supplies the
    modified prefactor, stored in ``prefactor``.
    """
    if N <= 0:
        raise ValueError(f"N must be positive, got {N}")
    p = as_eta(eta)
    if l_max is None:
        top = int(math.ceil(2.0 * N * max(abs(1 + p.eta), abs(1 - p.eta)) + 20))
        while True:
            table, log_pref = _raw_parent_table(N, p, top)
            shells = np.sum(np.abs(table) ** 2, axis=1)
            chosen = _choose_l_max(shells, tol)
            if chosen is not None:
                break
            top *= 2
        l_max = chosen
    else:
        top = l_max + 12
        table, log_pref = _raw_parent_table(N, p, top)
        shells = np.sum(np.abs(table) ** 2, axis=1)

    tail = float(shells[l_max + 1 :].sum() / shells.sum())
    if tail > tol:
        raise TruncationError(
            f"weight {tail:.3e} above l_max={l_max} exceeds tol={tol:.1e}; use a larger l_max"
        )
    cut = table[: l_max + 1, top - l_max : top + l_max + 1]
    norm = np.linalg.norm(cut)
    return AngularWavePacket(
        l_max=l_max,
        coeffs=cut / norm,
        N=float(N),
        eta=p,
        k=0,
        tail_weight=tail,
        prefactor=float(math.exp(log_pref) / norm),
    )


def linear_generators(eta) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Action of the deformed generators on linear functions ``c . (x, y, z)``.

    ``L_i (x_j) = i eps_ijk x_k``, so on coefficient vectors ``c`` the
    component ``L_i`` is the 3x3 matrix ``M[k, j] = i eps_ijk``.
    Returns ``(L3, Lplus, Lminus)`` in that representation.
    """
    p = as_eta(eta)
    p.require_regular()
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    mx, my, mz = (1j * eps[i].T for i in range(3))
    r = p.root
    tilted = (p.eta * mx + 1j * my) / r
    return (mx + 1j * p.eta * my) / r, tilted - mz, -tilted - mz


def exponent_vector(eta) -> np.ndarray:
    """Cartesian coefficients of ``v = x + i*eta*y``."""
    return np.array([1.0, 1j * as_eta(eta).eta, 0.0])


def vplus(eta, theta, phi):
    """``L+ v`` for ``v = sin(theta)(cos(phi) + i eta sin(phi))``.

    Closed form ``sqrt(1-eta**2) cos(theta) - eta sin(theta) cos(phi) - i sin(theta) sin(phi)``.
    A second application of ``L+`` gives zero, so ``L+^k exp(N v) = (N v+)^k exp(N v)``.
    """
    p = as_eta(eta)
    if abs(1.0 - p.eta) < 1e-14 or abs(1.0 + p.eta) < 1e-14:
        raise SingularEtaError(f"v+ is undefined at eta = {p.eta}")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return p.root * np.cos(theta) - p.eta * st * np.cos(phi) - 1j * st * np.sin(phi)


def raise_family(packet: AngularWavePacket, steps: int = 1) -> AngularWavePacket:
    """Apply the deformed raising generator ``steps`` times, renormalizing each time.

    Shells with ``l < k`` come out exactly zero. Raises
    :class:`EmptyPacketError` if nothing survives.
    """
    if steps < 1:
        raise ValueError(f"steps must be positive, got {steps}")
    p = packet.eta
    p.require_regular()
    blocks = {l: np.array(c) for l, c in packet.blocks()}
    k = packet.k
    generators = {l: su2_generators(l, p)[1] for l in blocks}
    for _ in range(steps):
        k += 1
        for l in blocks:
            blocks[l] = generators[l] @ blocks[l] if l >= k else np.zeros_like(blocks[l])
        norm = math.sqrt(sum(float(np.vdot(c, c).real) for c in blocks.values()))
        if norm < 1e-12:
            raise EmptyPacketError(f"raising to k={k} annihilated the packet (l_max={packet.l_max})")
        for l in blocks:
            blocks[l] = blocks[l] / norm
    table = _pack(blocks, packet.l_max)
    shells = np.sum(np.abs(table) ** 2, axis=1)
    return packet.with_coeffs(table, k=k, tail_weight=float(shells[-3:].sum()))


def family_member(N: float, eta, k: int, tol: float = DEFAULT_TAIL_TOL, l_max: int | None = None) -> AngularWavePacket:
    """Parent packet raised ``k`` times, with ``l_max`` grown until the raised tail is small.

    Raising reweights shell ``l`` by roughly ``l**(2k)``, so a cut that was
    fine for the parent can be too short for the family member. Shells are
    added in steps of 8 until the top three shells of the raised packet
    each hold less than 1e-14 and their sum less than ``tol``.
    """
    parent = parent_coefficients(N, eta, l_max=l_max, tol=tol)
    if k == 0:
        return parent
    current = parent.l_max if l_max is None else l_max
    while True:
        base = parent_coefficients(N, eta, l_max=current, tol=tol)
        raised = raise_family(base, k)
        top = raised.shell_weights()[-3:]
        if l_max is not None or (np.all(top < SHELL_TOL) and top.sum() < tol):
            return raised
        current += 8


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre (in cos theta) by uniform-phi lattice with packet values.

    ``amplitude`` and ``density`` have shape ``(len(thetas), len(phis))``;
    ``theta_weights * phi_step`` are the quadrature weights of the nodes.
    """

    thetas: np.ndarray
    phis: np.ndarray
    amplitude: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)
    theta_weights: np.ndarray = field(repr=False)

    @property
    def phi_step(self) -> float:
        return 2.0 * math.pi / len(self.phis)

    @property
    def weights(self) -> np.ndarray:
        return np.outer(self.theta_weights, np.full(len(self.phis), self.phi_step))

    def integral(self, values: np.ndarray | None = None) -> float:
        values = self.density if values is None else values
        return float(np.sum(values * self.weights))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.density), self.density.shape)
        return float(self.thetas[i]), float(self.phis[j])


def sphere_nodes(n_theta: int, n_phi: int):
    """Ascending-theta Gauss-Legendre nodes, their weights, and uniform phi nodes."""
    x, w = np.polynomial.legendre.leggauss(n_theta)
    order = np.argsort(-x)
    thetas = np.arccos(x[order])
    phis = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return thetas, w[order], phis


def evaluate_grid(packet: AngularWavePacket, thetas, phis) -> np.ndarray:
    """``sum_lm b_lm Y_lm`` on the outer product of ``thetas`` and ``phis``."""
    thetas = np.asarray(thetas, dtype=float)
    phis = np.asarray(phis, dtype=float)
    L = packet.l_max
    table = ac.legendre_table(L, thetas)  # (l, |m|, theta)
    m = np.arange(-L, L + 1)
    sign = np.where((m < 0) & (m % 2 == 1), -1.0, 1.0)
    legendre = table[:, np.abs(m), :] * sign[None, :, None]  # (l, m, theta)
    per_m = np.einsum("lm,lmt->mt", packet.coeffs, legendre)
    phases = np.exp(1j * np.outer(m, phis))
    return per_m.T @ phases


def density_grid(packet: AngularWavePacket, n_theta: int = DEFAULT_GRID[0], n_phi: int = DEFAULT_GRID[1]) -> SphereGrid:
    if n_theta < 8 or n_phi < 8:
        raise ValueError(f"grid resolution must be at least 8x8, got {n_theta}x{n_phi}")
    thetas, weights, phis = sphere_nodes(n_theta, n_phi)
    amplitude = evaluate_grid(packet, thetas, phis)
    return SphereGrid(thetas, phis, amplitude, np.abs(amplitude) ** 2, weights)


def partial_wave_table(packet: AngularWavePacket, floor: float = 1e-16) -> list[tuple[int, int, float]]:
    """Rows ``(l, m, |b_lm|**2)`` with weight at least ``floor``, sorted by (l, m)."""
    weights = np.abs(packet.coeffs) ** 2
    rows = []
    for l in range(packet.l_max + 1):
        for m in range(-l, l + 1):
            w = float(weights[l, m + packet.l_max])
            if w >= floor:
                rows.append((l, m, w))
    return rows


def weight_statistics(packet: AngularWavePacket) -> dict:
    """Mean l and the mean and variance of m under ``|b_lm|**2``."""
    w = np.abs(packet.coeffs) ** 2
    w = w / w.sum()
    l = np.arange(packet.l_max + 1)[:, None]
    m = np.arange(-packet.l_max, packet.l_max + 1)[None, :]
    mean_m = float(np.sum(w * m))
    return {
        "mean_l": float(np.sum(w * l)),
        "mean_m": mean_m,
        "var_m": float(np.sum(w * m * m) - mean_m ** 2),
    }


def annihilator_residual(packet: AngularWavePacket) -> float:
    """``||(Lx + i eta Ly - k sqrt(1-eta^2)) b||`` over all blocks."""
    w = packet.k * packet.eta.root if packet.k else 0.0
    total = 0.0
    for l, c in packet.blocks():
        op = build_nonnormal_operator(l, packet.eta)
        total += float(np.linalg.norm(op @ c - w * c) ** 2)
    return math.sqrt(total)


def packet_to_dict(packet: AngularWavePacket) -> dict:
    coeffs = [
        [l, m, float(packet.coeffs[l, m + packet.l_max].real), float(packet.coeffs[l, m + packet.l_max].imag)]
        for l in range(packet.l_max + 1)
        for m in range(-l, l + 1)
    ]
    return {
        "N": packet.N,
        "eta_re": packet.eta.eta.real,
        "eta_im": packet.eta.eta.imag,
        "k": packet.k,
        "l_max": packet.l_max,
        "coeffs": coeffs,
    }


def packet_from_dict(doc: dict) -> AngularWavePacket:
    l_max = int(doc["l_max"])
    entries = doc["coeffs"]
    if not entries:
        raise ValueError("packet document has no coefficients")
    table = np.zeros((l_max + 1, 2 * l_max + 1), dtype=complex)
    for l, m, re, im in entries:
        l, m = int(l), int(m)
        if not 0 <= l <= l_max or abs(m) > l:
            raise ValueError(f"coefficient index (l={l}, m={m}) outside l_max={l_max}")
        table[l, m + l_max] = complex(re, im)
    return AngularWavePacket(
        l_max=l_max,
        coeffs=table,
        N=float(doc["N"]),
        eta=SqueezeParameter(complex(doc["eta_re"], doc["eta_im"])),
        k=int(doc["k"]),
    )


def save_packet(packet: AngularWavePacket, path) -> None:
    Path(path).write_text(json.dumps(packet_to_dict(packet)))


def load_packet(path) -> AngularWavePacket:
    return packet_from_dict(json.loads(Path(path).read_text()))
