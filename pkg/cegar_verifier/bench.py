"""
Benchmark runs and generated query corpora.

A corpus directory holds pairs `<id>.nnet` / `<id>.prop`. bench() runs
every pair under every requested mode and returns one CSV row per run;
failures become ERROR rows instead of stopping the batch.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .bounds import propagate_bounds
from .config import AbstractionMode, DriverConfig, RefinementMode
from .driver import run
from .errors import VerificationError
from .network import Network, evaluate_batch, random_network
from .nnet import NNetMetadata, load_nnet, serialize_nnet
from .properties import load_property
from .report import bench_row, error_row
from .utils import Stopwatch, ensure_directory

_LOGGER = logging.getLogger(__name__)

DEFAULT_MODES = ("saturation-cegar", "no-abstraction")
ALL_MODES = ("saturation-cegar", "saturation-random", "indicator-cegar", "indicator-random", "no-abstraction")

CORPUS_FAMILIES = {
    # family: (layer sizes, weight range)
    "random": ((2, 6, 6, 2), 1.0),
    "hard": ((5, 24, 24, 24, 2), 0.5),
}


def config_for_mode(mode: str, base: DriverConfig) -> DriverConfig:
    """Turn a mode label such as `indicator-random` into a driver configuration."""
    if mode == "no-abstraction":
        return replace(base, use_abstraction=False, budget=base.budget.restarted())
    try:
        abstraction, refinement = mode.split("-", 1)
        return replace(
            base,
            abstraction=AbstractionMode(abstraction),
            refinement=RefinementMode(refinement),
            use_abstraction=True,
            budget=base.budget.restarted(),
        )
    except ValueError:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(ALL_MODES)}") from None


def discover_queries(directory: Path) -> List[Tuple[str, Path, Path]]:
    """(query id, network path, property path) for every complete pair, sorted by id."""
    pairs = []
    for prop in sorted(Path(directory).glob("*.prop")):
        net = prop.with_suffix(".nnet")
        if net.exists():
            pairs.append((prop.stem, net, prop))
        else:
            _LOGGER.warning(f"Skipping {prop.name}: no matching {net.name}")
    return pairs


def bench(
    directory: Path,
    modes: Sequence[str] = DEFAULT_MODES,
    base: Optional[DriverConfig] = None,
    logger: Optional[logging.Logger] = None,
) -> List[Dict[str, object]]:
    """Run every query under every mode, sequentially."""
    logger = logger or _LOGGER
    base = base or DriverConfig()
    configs = [(mode, config_for_mode(mode, base)) for mode in modes]
    rows = []
    for query_id, net_path, prop_path in discover_queries(directory):
        for mode, cfg in configs:
            clock = Stopwatch()
            try:
                net, _meta = load_nnet(net_path)
                prop = load_property(prop_path, net.input_size, net.output_size)
                report = run(net, prop, replace(cfg, budget=cfg.budget.restarted()), logger=logger)
                rows.append(bench_row(query_id, mode, report, clock.total_ms()))
                logger.info(f"{query_id} [{mode}]: {report.status.value} in {clock.total_ms():.1f} ms")
            except (VerificationError, OSError) as e:
                logger.error(f"{query_id} [{mode}]: {e}")
                rows.append(error_row(query_id, mode, clock.total_ms()))
            except Exception as e:
                logger.exception(f"{query_id} [{mode}]: unexpected {type(e).__name__}: {e}")
                rows.append(error_row(query_id, mode, clock.total_ms()))
    return rows


# =============================================================================
# Corpus generation
# =============================================================================

def _property_text(lower: np.ndarray, upper: np.ndarray, threshold: float) -> str:
    lines = ["# generated query: y0 - y1 > threshold"]
    for k, (lo, hi) in enumerate(zip(lower, upper)):
        lines.append(f"x{k} >= {float(lo)!r}")
        lines.append(f"x{k} <= {float(hi)!r}")
    lines.append(f"y0 - y1 > {float(threshold)!r}")
    return "\n".join(lines) + "\n"


def _threshold(net: Network, family: str, rng: np.random.Generator, samples: int = 256) -> float:
    """
    random: a threshold around the sampled range of y0 - y1, giving a mix
    of SAT and UNSAT queries. hard: a threshold between the sampled maximum
    and the interval upper bound, which interval bounds alone cannot settle.
    """
    n = net.input_size
    points = rng.uniform(0.0, 1.0, size=(samples, n))
    outputs = evaluate_batch(net, points)
    margin = outputs[:, 0] - outputs[:, 1]
    low, high = float(margin.min()), float(margin.max())
    if family == "random":
        return round(high + rng.uniform(-0.3, 0.3) * (high - low), 6)
    bounds = propagate_bounds(net, np.zeros(n), np.ones(n))
    interval_high = float(bounds.post_upper[-1][0] - bounds.post_lower[-1][1])
    return round(high + 0.5 * (interval_high - high), 6)


def generate_corpus(
    directory: Path,
    count: int,
    seed: int = 0,
    family: str = "random",
    logger: Optional[logging.Logger] = None,
) -> List[Path]:
    """Write `count` network/property pairs; returns the property paths."""
    logger = logger or _LOGGER
    if family not in CORPUS_FAMILIES:
        raise ValueError(f"unknown corpus family {family!r}; expected one of {', '.join(CORPUS_FAMILIES)}")
    sizes, weight_range = CORPUS_FAMILIES[family]
    directory = ensure_directory(Path(directory))
    rng = np.random.default_rng(seed)
    written = []
    for i in range(count):
        net = random_network(sizes, rng, weight_range=weight_range, bias_range=weight_range / 2)
        threshold = _threshold(net, family, rng)
        stem = f"{family}_{i:03d}"
        lower, upper = np.zeros(net.input_size), np.ones(net.input_size)
        meta = NNetMetadata.neutral(net.input_size, lower, upper)
        (directory / f"{stem}.nnet").write_text(
            serialize_nnet(net, meta, comment=f"{family} corpus, seed {seed}, query {i}"), encoding="utf-8"
        )
        prop_path = directory / f"{stem}.prop"
        prop_path.write_text(_property_text(lower, upper, threshold), encoding="utf-8")
        written.append(prop_path)
    logger.info(f"Wrote {count} {family} queries to {directory}")
    return written
