"""Command-line front end emitting CSV/JSON data for plotting.

Exit codes: 0 success, 2 usage error, 3 numerical-domain error.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import click

from . import dynamics, intelligent_states, wavepacket
from .errors import DegeneracyError, DomainError, EmptyPacketError, TruncationError

EXIT_USAGE = 2
EXIT_DOMAIN = 3

NUMERICAL_ERRORS = (DomainError, DegeneracyError, TruncationError, EmptyPacketError, OverflowError)


def fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def write_csv(path: Path | None, header: list[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if path is None:
        click.echo(buf.getvalue(), nl=False)
    else:
        path.write_text(buf.getvalue(), newline="")


def write_table(path: Path | None, header: list[str], rows, format: str) -> None:
    rows = list(rows)
    if format == "csv":
        write_csv(path, header, rows)
        return
    text = json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    if path is None:
        click.echo(text, nl=False)
    else:
        path.write_text(text)


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=1) + "\n")


@dataclass
class RunConfig:
    command: str
    N: float | None = None
    eta_re: float = 0.0
    eta_im: float = 0.0
    l: int | None = None
    l_max: int | None = None
    k: int = 0
    grid: tuple[int, int] = wavepacket.DEFAULT_GRID
    time: float | None = None
    fraction: tuple[int, int] | None = None
    omega0: float = 1.0
    threshold: float = dynamics.DEFAULT_THRESHOLD
    format: str = "csv"
    out: Path | None = None
    load: Path | None = None
    n_max: int = 7

    @property
    def eta(self) -> complex:
        return complex(self.eta_re, self.eta_im)

    def validate(self) -> None:
        def bad(msg):
            raise click.UsageError(msg)

        if self.l is not None and self.l < 0:
            bad("--l must be non-negative")
        if self.l_max is not None and self.l_max < 0:
            bad("--lmax must be non-negative")
        if self.N is not None and not self.N > 0:
            bad("--N must be positive")
        if self.k < 0:
            bad("--k must be non-negative")
        if min(self.grid) < 8:
            bad("--grid needs at least 8 nodes in each direction")
        if not self.omega0 > 0:
            bad("--omega0 must be positive")
        if not 0 < self.threshold < 1:
            bad("--threshold must lie in (0, 1)")
        if self.time is not None and self.fraction is not None:
            bad("--time and --fraction are mutually exclusive")
        if self.command in ("evolve", "revival-scan") and self.load is None and self.N is None:
            bad("give either --load or a packet spec with --N")
        if self.command == "packet" and self.N is None:
            bad("--N is required")
        if self.command == "revival-scan" and self.n_max < 2:
            bad("--n-max must be at least 2")


def parse_grid(ctx, param, value):
    if value is None:
        return wavepacket.DEFAULT_GRID
    try:
        t, p = value.lower().split("x")
        return int(t), int(p)
    except ValueError:
        raise click.BadParameter("expected THETAxPHI, e.g. 181x360")


def parse_fraction(ctx, param, value):
    if value is None:
        return None
    try:
        m, n = (int(part) for part in value.split("/"))
        dynamics.check_fraction(m, n)
    except ValueError as exc:
        raise click.BadParameter(f"expected M/N in lowest terms with n >= 1 ({exc})")
    return m, n


def run_guarded(fn, config: RunConfig):
    config.validate()
    try:
        fn(config)
    except NUMERICAL_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_DOMAIN)


def eta_options(f):
    f = click.option("--eta-im", type=float, default=0.0, show_default=True, help="Imaginary part of eta.")(f)
    f = click.option("--eta-re", type=float, default=0.0, show_default=True, help="Real part of eta.")(f)
    return f


def packet_options(f):
    f = click.option("--lmax", "l_max", type=int, default=None, help="Partial-wave cutoff (automatic if omitted).")(f)
    f = click.option("--k", type=int, default=0, show_default=True, help="Number of raising steps.")(f)
    f = click.option("--N", "N", type=float, default=None, help="Spread parameter of the parent packet.")(f)
    f = eta_options(f)
    return f


def grid_option(f):
    return click.option("--grid", default=None, callback=parse_grid, help="Grid resolution THETAxPHI [181x360].")(f)


def out_dir(config: RunConfig) -> Path:
    out = config.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def build_packet(config: RunConfig) -> wavepacket.AngularWavePacket:
    if config.load is not None:
        try:
            return wavepacket.load_packet(config.load)
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise click.UsageError(f"cannot load packet from {config.load}: {exc}")
    return wavepacket.family_member(config.N, config.eta, config.k, l_max=config.l_max)


@click.group()
def main():
    """Intelligent spin states, exponential packets on the sphere and rotor revivals."""


def cmd_states(config: RunConfig) -> None:
    states = intelligent_states.solve_intelligent(config.l, config.eta)
    rows = []
    for s in states:
        r = intelligent_states.expectations(s)
        rows.append(
            (s.k, s.w.real, s.w.imag, r.mean_Lx.real, r.mean_Ly.real, r.mean_Lz.real,
             r.var_Lx, r.var_Ly, r.product, r.bound)
        )
    header = ["k", "w_re", "w_im", "mean_Lx", "mean_Ly", "mean_Lz", "var_Lx", "var_Ly", "product", "bound"]
    write_table(config.out, header, rows, config.format)


@main.command("states")
@click.option("--l", "l", type=int, required=True, help="Angular momentum of the block.")
@eta_options
@click.option("--format", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output file (stdout if omitted).")
def states_command(l, eta_re, eta_im, format, out):
    """Table of all 2l+1 eigenstates of Lx + i eta Ly with their moments."""
    run_guarded(cmd_states, RunConfig("states", l=l, eta_re=eta_re, eta_im=eta_im, format=format, out=out))


def packet_summary(packet: wavepacket.AngularWavePacket) -> dict:
    report = packet.moments()
    stats = wavepacket.weight_statistics(packet)
    return {
        "N": packet.N,
        "eta_re": packet.eta.eta.real,
        "eta_im": packet.eta.eta.imag,
        "k": packet.k,
        "l_max": packet.l_max,
        "tail_weight": packet.tail_weight,
        "prefactor": packet.prefactor,
        "norm": packet.norm,
        "eigen_residual": wavepacket.annihilator_residual(packet),
        **report.as_dict(),
        **stats,
    }


def cmd_packet(config: RunConfig) -> None:
    packet = wavepacket.family_member(config.N, config.eta, config.k, l_max=config.l_max)
    out = out_dir(config)
    ext = config.format
    write_table(out / f"partial_waves.{ext}", ["l", "m", "weight"], wavepacket.partial_wave_table(packet), ext)
    grid = wavepacket.density_grid(packet, *config.grid)
    write_density(out / f"density.{ext}", grid, ext)
    summary = packet_summary(packet)
    summary["density_max_theta"], summary["density_max_phi"] = grid.argmax()
    summary["grid_integral"] = grid.integral()
    write_json(out / "summary.json", summary)
    wavepacket.save_packet(packet, out / "packet.json")


def write_density(path: Path, grid: wavepacket.SphereGrid, format: str) -> None:
    rows = (
        (float(t), float(p), float(grid.density[i, j]))
        for i, t in enumerate(grid.thetas)
        for j, p in enumerate(grid.phis)
    )
    write_table(path, ["theta", "phi", "density"], rows, format)


@main.command("packet")
@packet_options
@grid_option
@click.option("--format", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output directory [.].")
def packet_command(eta_re, eta_im, N, k, l_max, grid, format, out):
    """Partial-wave table, density grid and summary of a packet family member."""
    config = RunConfig("packet", N=N, eta_re=eta_re, eta_im=eta_im, k=k, l_max=l_max, grid=grid, format=format, out=out)
    run_guarded(cmd_packet, config)


def cmd_evolve(config: RunConfig) -> None:
    packet = build_packet(config)
    clock = dynamics.EvolutionClock(config.omega0)
    if config.fraction is not None:
        m, n = config.fraction
        report, grid = dynamics.fractional_snapshot(
            packet, m, n, clock, config.grid, config.threshold, return_grid=True
        )
    else:
        report, grid = dynamics.snapshot(packet, config.time or 0.0, clock, config.grid, config.threshold)
    out = out_dir(config)
    write_density(out / f"density.{config.format}", grid, config.format)
    write_json(out / "report.json", report.to_dict())


@main.command("evolve")
@packet_options
@click.option("--load", type=click.Path(path_type=Path), default=None, help="Packet JSON written by `packet`.")
@click.option("--time", "time_", type=float, default=None, help="Absolute time.")
@click.option("--fraction", default=None, callback=parse_fraction, help="Fraction M/N of the revival time.")
@click.option("--omega0", type=float, default=1.0, show_default=True)
@click.option("--threshold", type=float, default=dynamics.DEFAULT_THRESHOLD, show_default=True)
@grid_option
@click.option("--format", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output directory [.].")
def evolve_command(eta_re, eta_im, N, k, l_max, load, time_, fraction, omega0, threshold, grid, format, out):
    """Evolve a packet under H = L^2 and report the density and its lumps."""
    if time_ is None and fraction is None:
        raise click.UsageError("one of --time or --fraction is required")
    config = RunConfig(
        "evolve", N=N, eta_re=eta_re, eta_im=eta_im, k=k, l_max=l_max, load=load, time=time_,
        fraction=fraction, omega0=omega0, threshold=threshold, grid=grid, format=format, out=out,
    )
    run_guarded(cmd_evolve, config)


def cmd_revival_scan(config: RunConfig) -> None:
    packet = build_packet(config)
    clock = dynamics.EvolutionClock(config.omega0)
    reports = dynamics.revival_scan(packet, config.n_max, clock, config.grid, config.threshold)
    out = out_dir(config)
    rows = [(r.m, r.n, r.expected, r.lump_count, r.min_separation) for r in reports]
    write_csv(out / "revival_scan.csv", ["m", "n", "expected", "detected", "min_separation"], rows)
    write_json(out / "reports.json", [r.to_dict() for r in reports])


@main.command("revival-scan")
@packet_options
@click.option("--load", type=click.Path(path_type=Path), default=None, help="Packet JSON written by `packet`.")
@click.option("--n-max", "n_max", type=int, default=7, show_default=True)
@click.option("--omega0", type=float, default=1.0, show_default=True)
@click.option("--threshold", type=float, default=dynamics.DEFAULT_THRESHOLD, show_default=True)
@grid_option
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output directory [.].")
def revival_scan_command(eta_re, eta_im, N, k, l_max, load, n_max, omega0, threshold, grid, out):
    """Lump counts at every coprime fraction m/n with n <= n-max."""
    config = RunConfig(
        "revival-scan", N=N, eta_re=eta_re, eta_im=eta_im, k=k, l_max=l_max, load=load,
        n_max=n_max, omega0=omega0, threshold=threshold, grid=grid, out=out,
    )
    run_guarded(cmd_revival_scan, config)


if __name__ == "__main__":  # pragma: no cover
    main()
