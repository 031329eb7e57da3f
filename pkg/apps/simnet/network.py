# apps/simnet/network.py
"""
Fluid fair-share network on a simpy clock (milliseconds).

Every transfer pays one round trip, then streams its bytes. While streaming,
each endpoint's bandwidth is split equally between its active transfers and
a transfer moves at the smaller of its two shares. Rates are recomputed at
every start, finish, failure and cancellation; a single timer, tagged with a
generation number, fires at the next completion.
"""
import logging
from dataclasses import dataclass, field

import pandas as pd
import simpy

from apps.core.exceptions import ConfigurationError, TransferFailed

from .topology import ClusterTopology

logger = logging.getLogger(__name__)

BITS_EPSILON = 1e-6
TIME_EPSILON_MS = 1e-9
TRACE_COLUMNS = ["time_ms", "event", "src", "dst", "bytes"]


@dataclass
class Endpoint:
    name: str
    bandwidth: float            # Mbps
    organization: str | None = None
    alive: bool = True
    active: set = field(default_factory=set)

    @property
    def bits_per_ms(self) -> float:
        return self.bandwidth * 1000.0


class Transfer:
    """Handle for one transfer; `done` fires with the completion time."""

    def __init__(self, network, src, dst, nbytes):
        self.id = network.next_id()
        self.network = network
        self.src = src
        self.dst = dst
        self.nbytes = nbytes
        self.remaining = nbytes * 8.0
        self.rate = 0.0
        self.done = network.env.event()
        self.done.defused = True
        self.started_at = network.env.now
        self.completed_at = None
        self.failed = False
        self.cancelled = False
        self.streaming = False

    @property
    def finished(self) -> bool:
        return self.completed_at is not None or self.failed or self.cancelled

    def cancel(self):
        self.network.cancel(self)

    def __repr__(self):
        return f"<Transfer {self.id} {self.src}->{self.dst} {self.nbytes}B>"


class Network:

    def __init__(self, topology: ClusterTopology, env: simpy.Environment | None = None):
        self.topology = topology
        self.env = env or simpy.Environment()
        self.endpoints = {}
        self.trace = []
        self._pending = set()       # transfers still in their round-trip phase
        self._generation = 0
        self._last_advance = 0.0
        self._ids = 0
        for org, nodes in topology.organizations.items():
            for node in nodes:
                self.add_endpoint(node, topology.bandwidth[node], org)

    def add_endpoint(self, name: str, bandwidth: float, organization: str | None = None) -> Endpoint:
        if bandwidth <= 0:
            raise ConfigurationError(f"{name} needs a positive bandwidth")
        endpoint = Endpoint(name, bandwidth, organization)
        self.endpoints[name] = endpoint
        return endpoint

    def next_id(self) -> int:
        self._ids += 1
        return self._ids

    def now(self) -> float:
        return self.env.now

    def run_until_idle(self) -> float:
        self.env.run()
        return self.env.now

    def is_alive(self, name: str) -> bool:
        return self.endpoints[name].alive

    def rtt(self, src: str, dst: str) -> float:
        a, b = self.endpoints[src].organization, self.endpoints[dst].organization
        if a is not None and a == b:
            return self.topology.rtt_intra_ms
        return self.topology.rtt_inter_ms

    def _record(self, event, transfer):
        self.trace.append((round(self.env.now, 6), event, transfer.src, transfer.dst, transfer.nbytes))

    # -- transfers ---------------------------------------------------------

    def transfer(self, src: str, dst: str, nbytes: int, start_time: float | None = None) -> Transfer:
        handle = Transfer(self, src, dst, nbytes)
        self._pending.add(handle)
        self.env.process(self._run(handle, start_time))
        return handle

    def _run(self, handle, start_time):
        if start_time is not None and start_time > self.env.now:
            yield self.env.timeout(start_time - self.env.now)
        if handle.finished:
            return
        handle.started_at = self.env.now
        self._record("start", handle)
        if not self._both_alive(handle):
            self._fail(handle)
            return
        yield self.env.timeout(self.rtt(handle.src, handle.dst))
        if handle.finished:
            return
        self._pending.discard(handle)
        self._advance()
        handle.streaming = True
        self.endpoints[handle.src].active.add(handle)
        self.endpoints[handle.dst].active.add(handle)
        self._reschedule()

    def _both_alive(self, handle):
        return self.endpoints[handle.src].alive and self.endpoints[handle.dst].alive

    def _streaming(self):
        flows = set()
        for endpoint in self.endpoints.values():
            flows |= endpoint.active
        return sorted(flows, key=lambda t: t.id)

    def _advance(self):
        elapsed = self.env.now - self._last_advance
        if elapsed > 0:
            for flow in self._streaming():
                flow.remaining = max(0.0, flow.remaining - flow.rate * elapsed)
        self._last_advance = self.env.now

    def _detach(self, handle):
        self._pending.discard(handle)
        self.endpoints[handle.src].active.discard(handle)
        self.endpoints[handle.dst].active.discard(handle)

    def _reschedule(self):
        self._generation += 1
        soonest = None
        for flow in self._streaming():
            src, dst = self.endpoints[flow.src], self.endpoints[flow.dst]
            flow.rate = min(src.bits_per_ms / len(src.active), dst.bits_per_ms / len(dst.active))
            eta = flow.remaining / flow.rate
            soonest = eta if soonest is None else min(soonest, eta)
        if soonest is not None:
            self.env.process(self._timer(self._generation, soonest))

    def _timer(self, generation, delay):
        yield self.env.timeout(delay)
        if generation != self._generation:
            return
        self._advance()
        for flow in self._streaming():
            if flow.remaining <= BITS_EPSILON + flow.rate * TIME_EPSILON_MS:
                self._detach(flow)
                flow.completed_at = self.env.now
                self._record("finish", flow)
                flow.done.succeed(self.env.now)
        self._reschedule()

    def _fail(self, handle):
        self._detach(handle)
        handle.failed = True
        self._record("fail", handle)
        handle.done.fail(TransferFailed(
            f"transfer {handle.src}->{handle.dst} failed", src=handle.src, dst=handle.dst))

    def cancel(self, handle: Transfer) -> None:
        if handle.finished:
            return
        self._advance()
        self._detach(handle)
        handle.cancelled = True
        self._record("cancel", handle)
        self._reschedule()

    # -- failure injection -------------------------------------------------

    def kill_node(self, name: str) -> None:
        endpoint = self.endpoints[name]
        if not endpoint.alive:
            return
        self._advance()
        endpoint.alive = False
        victims = [t for t in list(self._pending) + self._streaming()
                   if name in (t.src, t.dst) and not t.finished]
        for handle in sorted(set(victims), key=lambda t: t.id):
            self._fail(handle)
        self._reschedule()
        logger.info("Node %s killed at %.3f ms", name, self.env.now)

    def kill_org(self, organization: str) -> None:
        for name in self._members(organization):
            self.kill_node(name)

    def revive(self, name: str) -> None:
        targets = self._members(name) if name in self.topology.organizations else [name]
        for target in targets:
            self.endpoints[target].alive = True
        logger.info("%s revived at %.3f ms", name, self.env.now)

    def _members(self, organization):
        if organization not in self.topology.organizations:
            raise ConfigurationError(f"unknown organization {organization!r}")
        return list(self.topology.organizations[organization])

    # -- trace -------------------------------------------------------------

    def trace_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.trace, columns=TRACE_COLUMNS)

    def export_trace(self, path) -> None:
        self.trace_frame().to_csv(path, index=False)
