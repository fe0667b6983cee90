"""
The CEGAR loop.

run() encodes the property, classifies the network, builds an initial
abstraction and then alternates between solving the abstract query and
refining the partition whenever the solver's counterexample does not hold
on the real network.
"""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from .abstraction import (
    Partition,
    cex_guided_refinement,
    choose_random_refinement,
    indicator_guided_abstraction,
    materialize,
    refine_split,
    saturate,
)
from .classifier import classify
from .config import INDICATOR_RESAMPLE_FACTOR, AbstractionMode, DriverConfig, RefinementMode
from .errors import IndicatorSamplingError
from .models import Query, RawProperty, RunStats, Status, VerdictReport
from .network import Network
from .properties import encode_output_property, translate_to_origin
from .solver import BranchAndBoundBackend, VerifierBackend, check_witness
from .utils import Stopwatch

_LOGGER = logging.getLogger(__name__)


def sample_indicators(
    query: Query,
    count: int,
    rng: np.random.Generator,
    resample_factor: int = INDICATOR_RESAMPLE_FACTOR,
) -> np.ndarray:
    """
    Points drawn uniformly from the query's box that also satisfy its
    linear conjuncts. Gives up after count * resample_factor draws.
    """
    n = query.input_size
    if count <= 0:
        return np.zeros((0, n))
    accepted = []
    drawn = 0
    limit = count * resample_factor
    while len(accepted) < count and drawn < limit:
        batch = rng.uniform(query.lower, query.upper, size=(count, n))
        drawn += count
        accepted.extend(x for x in batch if query.contains(x))
    if len(accepted) < count:
        raise IndicatorSamplingError(
            f"only {len(accepted)} of {count} indicator points satisfy the input constraints after {drawn} draws"
        )
    return np.array(accepted[:count])


def _initial_partition(
    classified: Network,
    query: Query,
    cfg: DriverConfig,
    rng: np.random.Generator,
    stats: RunStats,
    logger: logging.Logger,
) -> Partition:
    identity = Partition.identity(classified)
    if not cfg.use_abstraction:
        return identity
    if cfg.abstraction is AbstractionMode.SATURATION:
        return saturate(identity)
    indicators = np.zeros((0, query.input_size)) if query.is_empty else sample_indicators(query, cfg.indicator_count, rng)
    if len(indicators) == 0:
        stats.abstraction_fallback = True
    return indicator_guided_abstraction(
        classified, query, indicators,
        eps_strict=cfg.eps_strict,
        pair_sample_cap=cfg.pair_sample_cap,
        rng=rng,
        logger=logger,
    )


def _finish(status: Status, stats: RunStats, clock: Stopwatch, witness=None, message=None) -> VerdictReport:
    stats.solve_ms = clock.lap_ms()
    stats.total_ms = clock.total_ms()
    return VerdictReport(
        status=status,
        witness=None if witness is None else [float(v) for v in witness],
        stats=stats,
        message=message,
    )


def run_query(
    net: Network,
    query: Query,
    cfg: DriverConfig,
    backend: Optional[VerifierBackend] = None,
    logger: Optional[logging.Logger] = None,
) -> VerdictReport:
    """CEGAR on a single-output network and query y > c."""
    logger = logger or _LOGGER
    backend = backend or BranchAndBoundBackend(cfg.eps_strict, logger)
    budget = cfg.budget.restarted()
    rng = np.random.default_rng(cfg.seed)
    clock = Stopwatch()
    stats = RunStats(original_size=net.hidden_size())

    # the abstraction is sound for non-negative inputs only
    shifted, shifted_query, offset = translate_to_origin(net, query)
    classified = classify(shifted)
    stats.classified_size = classified.hidden_size()

    partition = _initial_partition(classified, shifted_query, cfg, rng, stats, logger)
    stats.initial_abstract_size = partition.group_count()
    stats.final_abstract_size = partition.group_count()
    stats.preprocess_ms = clock.lap_ms()
    logger.info(
        f"Hidden neurons: {stats.original_size} original, {stats.classified_size} classified, "
        f"{stats.initial_abstract_size} abstract ({cfg.mode_label()})"
    )

    while True:
        abstract = materialize(classified, partition)
        verdict = backend.verify(abstract.network, shifted_query, budget)
        stats.solver_calls += 1
        stats.final_abstract_size = partition.group_count()
        logger.info(
            f"Round {stats.refinement_rounds}: abstract size {stats.final_abstract_size}, "
            f"verdict {verdict.status.value}"
        )

        if verdict.status is Status.UNSAT:
            return _finish(Status.UNSAT, stats, clock)
        if verdict.status in (Status.TIMEOUT, Status.INCONCLUSIVE):
            return _finish(verdict.status, stats, clock, message=f"solver returned {verdict.status.value}")

        x = np.asarray(verdict.witness, dtype=np.float64)
        original_x = x + offset
        if check_witness(net, query, original_x, cfg.eps_strict) is not None:
            return _finish(Status.SAT, stats, clock, witness=original_x)

        if partition.is_identity():
            logger.warning("Counterexample fails on the concrete network although nothing is abstracted")
            return _finish(
                Status.INCONCLUSIVE, stats, clock,
                message="solver witness does not hold on the concrete network",
            )

        if cfg.refinement is RefinementMode.CEGAR:
            neuron = cex_guided_refinement(classified, abstract, x)
        else:
            neuron = choose_random_refinement(partition, rng)
        partition = refine_split(partition, neuron)
        stats.refinement_rounds += 1
        logger.debug(f"Spurious counterexample; splitting out neuron {neuron}")


def run(
    concrete_raw: Network,
    prop: RawProperty,
    cfg: DriverConfig,
    backend: Optional[VerifierBackend] = None,
    logger: Optional[logging.Logger] = None,
) -> VerdictReport:
    """Verify a parsed property against a parsed network."""
    net, query = encode_output_property(concrete_raw, prop)
    return run_query(net, query, cfg, backend, logger)
