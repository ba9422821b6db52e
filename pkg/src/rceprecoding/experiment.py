"""Monte-Carlo BER / power sweeps over the full transmit-receive chain.

Each channel realization reuses the same channel, symbols and noise for
every available-power point and every precoder, so curves differ only by
the precoder under test.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .amplifier import PaConfig, clip, consumed_power, radiated_power
from .linear import LrceSettings, fit_lrce, wiener_filter
from .receiver import BerRecord, blind_gains, count_bit_errors, detect
from .signals import NoiseModel, build_constellation, draw_channel, draw_noise, draw_symbols
from .symbolwise import CONSTANT_ENVELOPE, RELAXED, SymbolwiseSettings, calibrate_f, solve_block

log = logging.getLogger(__name__)

PRECODERS = ("wf_ideal", "wf", "lrce", "nl_ce", "nl_rce")
CSV_HEADER = ("precoder", "ptx", "radiated", "pa_power", "ber", "realizations", "seed")

# stream ids for the per-realization seed tuples
_CHANNEL, _SYMBOLS, _NOISE, _LRCE_SAMPLES, _CALIBRATION = range(5)


@dataclass(frozen=True)
class ExperimentConfig:
    antennas: int = 32
    users: int = 4
    constellation_order: int = 16
    block_length: int = 1000
    channel_realizations: int = 20
    ptx_sweep: tuple[float, ...] = (1.0, 10.0, 100.0)
    precoders: tuple[str, ...] = PRECODERS
    lrce: LrceSettings = field(default_factory=LrceSettings)
    symbolwise: SymbolwiseSettings = field(default_factory=SymbolwiseSettings)
    seed: int = 0
    noise_variance: float = 1.0
    receiver_gain: str = "blind"

    def __post_init__(self):
        if min(self.antennas, self.users, self.block_length, self.channel_realizations) < 1:
            raise ValueError("all dimensions must be positive")
        if self.antennas < self.users:
            raise ValueError("need at least as many antennas as users")
        if not self.ptx_sweep or any(not p > 0 for p in self.ptx_sweep):
            raise ValueError("available-power sweep must be a nonempty list of positive values")
        unknown = set(self.precoders) - set(PRECODERS)
        if unknown or not self.precoders:
            raise ValueError(f"unknown precoders {sorted(unknown)}; choose from {PRECODERS}")
        if self.receiver_gain not in ("blind", "genie"):
            raise ValueError("receiver_gain must be 'blind' or 'genie'")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    def digest(self) -> str:
        blob = json.dumps(dataclasses.asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class ResultRow:
    precoder: str
    ptx: float
    radiated: float
    pa_power: float
    ber: float
    realizations: int
    seed: int


@dataclass(frozen=True)
class RealizationResult:
    errors: BerRecord
    radiated: float
    consumed: float
    converged: bool


def run_realization(config: ExperimentConfig, precoder: str, ptx: float, realization: int) -> RealizationResult:
    """One channel draw through precoder, amplifier, channel, noise and receiver."""
    M, N = config.users, config.antennas
    constellation = build_constellation(config.constellation_order)
    noise = NoiseModel.identity(M, config.noise_variance)
    pa = PaConfig(ptx, N)
    base = (config.seed, realization)
    H = draw_channel(M, N, base + (_CHANNEL,))
    S = draw_symbols(constellation, M, config.block_length, base + (_SYMBOLS,))
    eta = draw_noise(noise, config.block_length, base + (_NOISE,))
    converged = True

    if precoder in ("wf_ideal", "wf"):
        wf = wiener_filter(H, noise, pa)
        X, design_gain = wf.apply(S), wf.receive_gain
    elif precoder == "lrce":
        samples = draw_symbols(constellation, M, config.lrce.sample_count, base + (_LRCE_SAMPLES,))
        lin, trace = fit_lrce(H, noise, pa, config.lrce, samples)
        X, design_gain = lin.apply(S), lin.receive_gain
        converged = trace.converged
    else:
        mode = CONSTANT_ENVELOPE if precoder == "nl_ce" else RELAXED
        settings = dataclasses.replace(config.symbolwise, mode=mode)
        design_gain = calibrate_f(H, pa, settings, constellation, base + (_CALIBRATION,), noise)
        if design_gain > 0:
            sol = solve_block(S, design_gain, H, pa, settings, noise)
            X = sol.transmit
            converged = bool(sol.converged.all())
        else:
            X = np.zeros((config.block_length, N), dtype=complex)
            converged = False

    x_pa = X if precoder == "wf_ideal" else clip(X, pa)
    received = x_pa @ H.T + eta
    if config.receiver_gain == "genie" and design_gain > 0:
        gains = np.full(M, design_gain)
    else:
        gains = blind_gains(received, constellation)
    errors = count_bit_errors(S, detect(received, gains, constellation), constellation)
    if not converged:
        log.info("%s at P_tx=%.4g, realization %d: optimizer did not converge", precoder, ptx, realization)
    return RealizationResult(errors, radiated_power(x_pa), consumed_power(x_pa, pa), converged)


def run_experiment(config: ExperimentConfig, threads: int = 1) -> list[ResultRow]:
    """Rows in sweep order (available power outer, precoder inner)."""
    rows = []
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        for ptx in config.ptx_sweep:
            for precoder in config.precoders:
                jobs = range(config.channel_realizations)
                if pool is None:
                    results = [run_realization(config, precoder, ptx, r) for r in jobs]
                else:
                    results = list(pool.map(lambda r: run_realization(config, precoder, ptx, r), jobs))
                pooled = sum((res.errors for res in results), BerRecord(0, 0))
                rows.append(
                    ResultRow(
                        precoder=precoder,
                        ptx=float(ptx),
                        radiated=float(np.mean([res.radiated for res in results])),
                        pa_power=float(np.mean([res.consumed for res in results])),
                        ber=pooled.ber,
                        realizations=len(results),
                        seed=config.seed,
                    )
                )
                log.info("%-8s P_tx=%-10.4g BER=%.3e", precoder, ptx, pooled.ber)
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def _fmt(value: float) -> str:
    return format(value, ".9g")


def emit_csv(rows, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for row in rows:
                writer.writerow(
                    [row.precoder, _fmt(row.ptx), _fmt(row.radiated), _fmt(row.pa_power), _fmt(row.ber),
                     row.realizations, row.seed]
                )
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_csv(path) -> list[ResultRow]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            ResultRow(p, float(a), float(r), float(c), float(b), int(n), int(s))
            for p, a, r, c, b, n, s in reader
        ]


AXES = {
    "available": ("ptx", "Available power $P_{tx}$"),
    "radiated": ("radiated", "Radiated power $P_r$"),
    "pa": ("pa_power", "PA power $P_{PA}$"),
}


def build_figure(rows, x_axis: str = "available", db: bool = False):
    """Matplotlib figure with log-scale BER against the chosen power axis."""
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib.figure import Figure

    if not rows:
        raise ValueError("nothing to plot")
    if x_axis not in AXES:
        raise ValueError(f"x_axis must be one of {sorted(AXES)}")
    attr, label = AXES[x_axis]
    fig = Figure(figsize=(6.0, 4.5))
    ax = fig.add_subplot()
    order = list(dict.fromkeys(r.precoder for r in rows))
    for name in order:
        pts = sorted((getattr(r, attr), r.ber) for r in rows if r.precoder == name)
        x = np.array([p[0] for p in pts])
        y = np.array([p[1] for p in pts], dtype=float)
        y[y <= 0] = np.nan
        if db:
            x = 10 * np.log10(x)
        style = "-o" if len(pts) > 1 else "o"
        ax.plot(x, y, style, label=name, markersize=4)
    ax.set_yscale("log")
    ax.set_xlabel(label + (" [dB]" if db else " [W]"))
    ax.set_ylabel("BER")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()
    fig.tight_layout()
    return fig


def emit_plot(rows, x_axis, path, db: bool = False) -> Path:
    """Write the BER-versus-power figure as SVG (or any format matplotlib infers from the suffix)."""
    import matplotlib

    path = Path(path)
    fig = build_figure(rows, x_axis, db)
    with matplotlib.rc_context({"svg.hashsalt": "rceprecoding"}):
        try:
            fig.savefig(path, metadata={"Date": None} if path.suffix.lower() == ".svg" else None)
        except OSError as exc:
            raise OSError(f"cannot write plot to {path}: {exc}") from exc
    return path


# --- configuration files -------------------------------------------------

def parse_ptx(text: str) -> tuple[float, ...]:
    """``dB:start:step:stop`` (inclusive), ``dB:v1,v2,...`` or a list of linear watts."""
    text = text.strip()
    if text.lower().startswith("db:"):
        body = text[3:]
        if "," in body or body.count(":") == 0:
            return tuple(10 ** (float(v) / 10) for v in body.split(",") if v.strip())
        start, step, stop = (float(v) for v in body.split(":"))
        if step <= 0:
            raise ValueError("dB sweep step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(10 ** ((start + i * step) / 10) for i in range(n))
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _opt_float(text: str) -> float | None:
    return None if text.strip().lower() in ("auto", "none", "") else float(text)


def load_config(path) -> ExperimentConfig:
    """Read an INI-style experiment file; missing keys take the dataclass defaults."""
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh)
    exp = parser["experiment"] if parser.has_section("experiment") else {}
    defaults = ExperimentConfig()
    kwargs = {}
    ints = {"antennas": "antennas", "users": "users", "constellation": "constellation_order",
            "block_length": "block_length", "channel_realizations": "channel_realizations", "seed": "seed"}
    for key, attr in ints.items():
        if key in exp:
            kwargs[attr] = int(exp[key])
    if "ptx" in exp:
        kwargs["ptx_sweep"] = parse_ptx(exp["ptx"])
    if "precoders" in exp:
        kwargs["precoders"] = tuple(p.strip() for p in exp["precoders"].split(",") if p.strip())
    if "noise_variance" in exp:
        kwargs["noise_variance"] = float(exp["noise_variance"])
    if "receiver_gain" in exp:
        kwargs["receiver_gain"] = exp["receiver_gain"].strip()

    if parser.has_section("lrce"):
        sec = parser["lrce"]
        d = defaults.lrce
        kwargs["lrce"] = LrceSettings(
            penalty_weight=sec.getfloat("lambda", d.penalty_weight),
            step_size=_opt_float(sec.get("step_size", "auto")),
            tolerance=sec.getfloat("tolerance", d.tolerance),
            sample_count=sec.getint("sample_count", d.sample_count),
            max_iterations=sec.getint("max_iterations", d.max_iterations),
            fixed_selection=sec.getboolean("fixed_selection", d.fixed_selection),
        )
    if parser.has_section("symbolwise"):
        sec = parser["symbolwise"]
        d = defaults.symbolwise
        kwargs["symbolwise"] = SymbolwiseSettings(
            step_size=_opt_float(sec.get("step_size", "auto")),
            tolerance=sec.getfloat("tolerance", d.tolerance),
            f_refinement_rounds=sec.getint("f_refinement_rounds", d.f_refinement_rounds),
            sample_count=sec.getint("sample_count", d.sample_count),
            max_iterations=sec.getint("max_iterations", d.max_iterations),
            multistart=sec.getboolean("multistart", d.multistart),
        )
    return ExperimentConfig(**kwargs)


def write_manifest(config: ExperimentConfig, out_dir) -> Path:
    path = Path(out_dir) / "manifest.json"
    manifest = {
        "config_sha256": config.digest(),
        "seed": config.seed,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config": dataclasses.asdict(config),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")
    return path
