# apps/cluster/experiments.py
"""
Benchmarks run on the simulated network against a throw-away consortium.

Each experiment publishes to its own scratch ledger channel, keeps chunks in
memory, and drops the channel when it is done. Results are pandas frames with
fixed columns; `to_csv` renders them byte-stable for a given seed.
"""
import logging
import uuid
from contextlib import contextmanager

import numpy as np
import pandas as pd
from django.conf import settings

from apps.core.constants import MB
from apps.core.exceptions import ConfigurationError
from apps.ledger.contract import FileChannelContract
from apps.protocol.baseline import BaselineStore, stratified_holder
from apps.protocol.client import read_file, write_file

from .config import ClusterSpec, synthetic_spec

logger = logging.getLogger(__name__)

LINK_COLUMNS = ["chunks", "max_links_per_node", "total_links", "link_bytes"]
LATENCY_COLUMNS = ["size_mb", "system", "op", "mean_latency_ms"]
FLOAT_FORMAT = "%.3f"

UNIFORM = "uniform"
STEPPED = "stepped"

DEFAULT_CODE = {"n": 6, "k": 3, "l": 3, "x": 3, "y": 1}


def reference_spec(chunk_size: int, seed: int = 0) -> ClusterSpec:
    """Three organizations of two nodes each, 1,000 Mbps everywhere."""
    return synthetic_spec(3, 2, [1000] * 3, DEFAULT_CODE, chunk_size, seed=seed,
                          rtt_intra_ms=settings.DBNODE["RTT_INTRA_MS"],
                          rtt_inter_ms=settings.DBNODE["RTT_INTER_MS"],
                          client_bandwidth=settings.DBNODE["CLIENT_BANDWIDTH_MBPS"])


def evaluation_spec(mode: str, chunk_size: int, seed: int = 0) -> ClusterSpec:
    """Four organizations of three nodes; uniform or stepped bandwidth per organization."""
    if mode == UNIFORM:
        bandwidths = [settings.DBNODE["UNIFORM_BANDWIDTH_MBPS"]] * 4
    elif mode == STEPPED:
        bandwidths = list(settings.DBNODE["STEPPED_BANDWIDTHS_MBPS"])
    else:
        raise ConfigurationError(f"unknown bandwidth mode {mode!r}")
    return synthetic_spec(4, 3, bandwidths, DEFAULT_CODE, chunk_size, seed=seed,
                          rtt_intra_ms=settings.DBNODE["RTT_INTRA_MS"],
                          rtt_inter_ms=settings.DBNODE["RTT_INTER_MS"],
                          client_bandwidth=settings.DBNODE["CLIENT_BANDWIDTH_MBPS"])


@contextmanager
def scratch_consortium(spec: ClusterSpec):
    ledger = FileChannelContract(f"scratch-{uuid.uuid4().hex[:12]}")
    consortium = spec.build_consortium(ledger)
    consortium.publish()
    try:
        yield consortium
    finally:
        ledger.drop_channel()


def to_csv(frame: pd.DataFrame) -> str:
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


# -- link overhead -----------------------------------------------------------

def bench_links(max_chunks: int = 1000, step: int = 100, trials: int | None = None,
                seed: int | None = None, chunk_bytes: int | None = None,
                spec: ClusterSpec | None = None) -> pd.DataFrame:
    """
    Store random one-stripe files until `max_chunks` chunks are placed and
    sample the link counts every `step` chunks. A sample is taken once the
    stored chunk count reaches it, so with n chunks per stripe the samples
    fall on the first stripe boundary at or past each step.
    """
    if max_chunks < 0 or step <= 0:
        raise ConfigurationError("max chunks must be non-negative and step positive")
    trials = trials or settings.DBNODE["TRIALS"]
    seed = settings.DBNODE["SEED"] if seed is None else seed
    if seed < 0:
        raise ConfigurationError(f"seed must be non-negative, got {seed}")
    chunk_bytes = chunk_bytes or settings.DBNODE["CHUNK_SIZE"]
    spec = spec or reference_spec(chunk_bytes, seed)
    points = list(range(0, max_chunks + 1, step))
    params = spec.params

    samples = {x: [] for x in points}
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        with scratch_consortium(spec) as consortium:
            chunks = logical_links = 0
            for x in points:
                while chunks < x:
                    receipt = write_file(consortium, "bench", rng.bytes(params.k * spec.chunk_size))
                    chunks += receipt.chunks
                    logical_links += receipt.links
                stats = consortium.link_stats()
                samples[x].append((stats["max_links_per_node"], logical_links, stats["link_bytes"]))

    rows = []
    for x in points:
        count = len(samples[x])
        rows.append({
            "chunks": x,
            "max_links_per_node": sum(s[0] for s in samples[x]) / count,
            "total_links": sum(s[1] for s in samples[x]) / count,
            "link_bytes": sum(s[2] for s in samples[x]) / count,
        })
    logger.info("Link benchmark finished: %d points, %d trials", len(points), trials)
    return pd.DataFrame(rows, columns=LINK_COLUMNS)


# -- latency -----------------------------------------------------------------

def bench_latency(mode: str = UNIFORM, sizes_mb=None, trials: int | None = None,
                  seed: int | None = None, sequential: bool = False,
                  chunk_size: int | None = None) -> pd.DataFrame:
    """
    Mean simulated write and read latency of the coded store against the
    full-copy baseline, per file size, on the four-organization topology.
    """
    sizes_mb = list(sizes_mb or settings.DBNODE["BENCH_SIZES_MB"])
    if any(s <= 0 for s in sizes_mb):
        raise ConfigurationError("file sizes must be positive")
    trials = trials or settings.DBNODE["TRIALS"]
    seed = settings.DBNODE["SEED"] if seed is None else seed
    if seed < 0:
        raise ConfigurationError(f"seed must be non-negative, got {seed}")
    chunk_size = chunk_size or settings.DBNODE["CHUNK_SIZE"]
    spec = evaluation_spec(mode, chunk_size, seed)

    rows = []
    with scratch_consortium(spec) as consortium:
        baseline = BaselineStore(consortium)
        for size_mb in sizes_mb:
            nbytes = int(round(size_mb * MB))
            totals = {key: 0.0 for key in (("dbnode", "write"), ("dbnode", "read"),
                                           ("baseline", "write"), ("baseline", "read"))}
            for trial in range(trials):
                data = np.random.default_rng([seed, nbytes, trial]).bytes(nbytes)

                receipt = write_file(consortium, "bench", data, sequential=sequential)
                result = read_file(consortium, "bench", receipt.fid, sequential=sequential)
                totals["dbnode", "write"] += receipt.latency_ms
                totals["dbnode", "read"] += result.latency_ms
                consortium.purge(receipt.fid)
                consortium.ledger.delete_file(receipt.fid)

                holder = stratified_holder(consortium.topology, trial, seed)
                fid, write_ms = baseline.write(holder, data)
                _, read_ms = baseline.read(fid)
                totals["baseline", "write"] += write_ms
                totals["baseline", "read"] += read_ms
                baseline.delete(fid)

            for (system, op), total in totals.items():
                rows.append({"size_mb": size_mb, "system": system, "op": op,
                             "mean_latency_ms": total / trials})
            logger.info("Latency benchmark (%s) finished %g MB", mode, size_mb)
    return pd.DataFrame(rows, columns=LATENCY_COLUMNS)
