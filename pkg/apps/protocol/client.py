# apps/protocol/client.py
"""
Client side of the write and read algorithms, run on the simulated clock.

Write: partition and encode every stripe, compute the file identifier, fetch
the slot tables, plan each stripe against the masters' view, ship chunks to
the holding organizations' masters (who forward them inside the
organization) and links to the designated organizations, then record the
file tree on the ledger.

Read: fetch the file tree (the access check), fetch the slot tables, ask for
all n chunks of every stripe at once and decode as soon as k have landed.
Stragglers are cancelled so their bandwidth goes back to the pool.
"""
import logging
from dataclasses import dataclass, field

import simpy

from apps.core.constants import LINK_RECORD_BYTES
from apps.core.digests import digest
from apps.core.exceptions import (
    ConfigurationError,
    DBNodeError,
    DigestMismatch,
    DuplicateFile,
    TransferFailed,
    UnrecoverableStripe,
    WriteFailed,
)
from apps.erasure.stripes import decode_stripe, encode_file, reassemble_file
from apps.ledger.records import AccessPolicy, FileTree
from apps.nodes import messages as msg
from apps.placement.planner import designate_stripe, plan_stripe

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WriteReceipt:
    fid: str
    stripes: int
    chunks: int
    links: int
    link_copies: int
    latency_ms: float

    @property
    def link_bytes(self) -> int:
        return self.link_copies * LINK_RECORD_BYTES


@dataclass
class ReadResult:
    data: bytes = field(repr=False)
    latency_ms: float
    fid: str
    chunks_received: int = 0
    redirects: int = 0
    fallbacks: int = 0
    purged: bool = False


@dataclass
class _Outcome:
    value: object = None
    error: Exception | None = None


def _guarded(generator):
    try:
        value = yield from generator
    except DBNodeError as exc:
        return _Outcome(error=exc)
    return _Outcome(value=value)


def drive(network, generator):
    outcome = network.env.run(until=network.env.process(_guarded(generator)))
    if outcome.error is not None:
        raise outcome.error
    return outcome.value


def _ledger_call(consortium):
    """The ledger peer sits in the client's own organization."""
    return consortium.network.env.timeout(consortium.topology.rtt_intra_ms)


# -- write -----------------------------------------------------------------

def write_file(consortium, owner: str, data: bytes, policy: AccessPolicy | None = None,
               exclusions=(), sequential: bool = False) -> WriteReceipt:
    policy = policy or AccessPolicy()
    exclusions = frozenset(exclusions)
    unknown = exclusions - set(consortium.topology.organizations)
    if unknown:
        raise ConfigurationError(f"cannot exclude unknown organizations {sorted(unknown)}")

    params = consortium.params
    stripes, length = encode_file(data, params, consortium.chunk_size)
    tree = FileTree([s.chunk_hashes for s in stripes], length, owner)
    fid = tree.file_hash
    if consortium.ledger.has_file(fid):
        raise DuplicateFile(f"file {fid} is already stored", fid=fid)

    receipt = drive(consortium.network, _write(consortium, tree, stripes, policy,
                                                exclusions, sequential))
    logger.info("Wrote %s: %d stripes, %d links, %.3f ms",
                fid[:12], receipt.stripes, receipt.links, receipt.latency_ms)
    return receipt


def _write(consortium, tree, stripes, policy, exclusions, sequential):
    env = consortium.network.env
    started = env.now
    fid = tree.file_hash

    yield _ledger_call(consortium)
    consortium.refresh()
    tables = consortium.tables
    state = consortium.placement_state()
    plans = [plan_stripe(s.chunk_hashes, tables, consortium.params, exclusions, state)
             for s in stripes]

    jobs = []
    for stripe, plan in zip(stripes, plans):
        payloads = {c.hash: c.data for c in stripe.chunks}
        job = _guarded(_store_stripe(consortium, plan, payloads, fid))
        if sequential:
            outcome = yield env.process(job)
            jobs.append(outcome)
            if outcome.error is not None:
                break
        else:
            jobs.append(env.process(job))
    if not sequential and jobs:
        yield env.all_of(jobs)
        jobs = [p.value for p in jobs]

    errors = [o.error for o in jobs if o.error is not None]
    if errors:
        consortium.purge(fid)
        logger.warning("Write of %s rolled back: %s", fid[:12], errors[0])
        raise WriteFailed(f"write of {fid} failed: {errors[0]}", fid=fid) from errors[0]

    yield _ledger_call(consortium)
    try:
        consortium.ledger.put_file_tree(tree, policy, n=consortium.params.n,
                                        k=consortium.params.k, chunk_size=consortium.chunk_size)
    except DBNodeError:
        consortium.purge(fid)
        raise

    return WriteReceipt(
        fid=fid,
        stripes=len(stripes),
        chunks=len(stripes) * consortium.params.n,
        links=sum(len(p.links) for p in plans),
        link_copies=sum(consortium.nodes[n].references(fid) - consortium.nodes[n].chunk_references(fid)
                        for n in consortium.nodes),
        latency_ms=env.now - started,
    )


def _store_stripe(consortium, plan, payloads, fid):
    env = consortium.network.env
    masters = consortium.masters
    transfers = []

    for entry in plan.entries:
        transfers.append(env.process(_guarded(
            _ship(consortium, masters[entry.holder_org], entry.holder,
                  len(payloads[entry.chunk_hash])))))

    by_hash = {e.chunk_hash: e for e in plan.entries if e.diverted}
    for link in plan.links:
        entry = by_hash[link.chunk_hash]
        master = masters[entry.designated_org]
        # the master files a directory copy either way
        target = entry.designated_node if consortium.network.is_alive(entry.designated_node) else master
        transfers.append(env.process(_guarded(
            _ship(consortium, master, target, msg.StoreLink.wire_size))))

    if transfers:
        yield env.all_of(transfers)
    for proc in transfers:
        if proc.value.error is not None:
            raise WriteFailed(f"stripe {plan.stripe_hash[:12]} not delivered: {proc.value.error}")

    involved = {e.holder_org for e in plan.entries} | {by_hash[ln.chunk_hash].designated_org
                                                       for ln in plan.links}
    for org in sorted(involved):
        consortium.nodes[masters[org]].handle(msg.Distribute(plan, payloads, fid, org))
    return plan


def _ship(consortium, master, target, nbytes):
    """client -> master, then master -> target inside the organization."""
    net = consortium.network
    yield net.transfer(consortium.client, master, nbytes).done
    if target != master:
        yield net.transfer(master, target, nbytes).done


# -- read ------------------------------------------------------------------

class _ReadStats:
    def __init__(self):
        self.redirects = 0
        self.fallbacks = 0
        self.received = 0


def read_file(consortium, requester: str, fid: str, sequential: bool = False) -> ReadResult:
    result = drive(consortium.network, _read(consortium, requester, fid, sequential))
    logger.info("Read %s for %s: %d bytes, %.3f ms",
                fid[:12], requester, len(result.data), result.latency_ms)
    return result


def _read(consortium, requester, fid, sequential):
    env = consortium.network.env
    started = env.now

    yield _ledger_call(consortium)
    grant = consortium.ledger.get_file_tree(fid, requester)
    try:
        data, stats = yield from _read_granted(consortium, grant.tree, fid, sequential)
    finally:
        # the ledger record is gone once the last token is spent, read or not
        if grant.final:
            consortium.purge(fid)
    return ReadResult(data=data, latency_ms=env.now - started, fid=fid,
                      chunks_received=stats.received, redirects=stats.redirects,
                      fallbacks=stats.fallbacks, purged=grant.final)


def _read_granted(consortium, tree, fid, sequential):
    env = consortium.network.env
    if tree.file_hash != fid:
        raise DigestMismatch(f"ledger returned tree {tree.file_hash} for {fid}", fid=fid)

    yield _ledger_call(consortium)
    consortium.refresh()
    stats = _ReadStats()

    decoded = {}
    if sequential:
        for index, chunk_hashes in enumerate(tree.stripes):
            decoded[index] = yield from _read_stripe(consortium, index, chunk_hashes, stats)
    else:
        procs = [env.process(_guarded(_read_stripe(consortium, i, hashes, stats)))
                 for i, hashes in enumerate(tree.stripes)]
        if procs:
            yield env.all_of(procs)
        for index, proc in enumerate(procs):
            if proc.value.error is not None:
                raise proc.value.error
            decoded[index] = proc.value.value

    return reassemble_file(decoded, tree.original_length, tree.stripe_count), stats


def _read_stripe(consortium, index, chunk_hashes, stats):
    env = consortium.network.env
    params = consortium.params
    designations = designate_stripe(chunk_hashes, consortium.tables, params.l)
    jobs = [_FetchJob(consortium, i, h, designations[i], stats)
            for i, h in enumerate(chunk_hashes)]
    pending = {job.start(): job for job in jobs}
    received = {}

    while len(received) < params.k and pending:
        yield env.any_of(list(pending))
        for proc in [p for p in pending if p.triggered]:
            job = pending.pop(proc)
            data = proc.value
            if data is not None and digest(data) == job.chunk_hash:
                received[job.index] = data

    if pending:
        logger.debug("Stripe %d decoded from %d chunks, %d stragglers cancelled",
                     index, len(received), len(pending))
    for job in pending.values():
        job.stop()
    if len(received) < params.k:
        logger.warning("Stripe %d unrecoverable: %d of %d chunks reachable",
                       index, len(received), params.k)
        raise UnrecoverableStripe(
            f"stripe {index}: {len(received)} of {params.k} chunks reachable",
            stripe=index, available=sorted(received))
    stats.received += len(received)

    return decode_stripe(received, params)


class _FetchJob:
    """
    Locate and download one chunk: the designated node first (following a
    redirect if it has a link), then the designated organization's master,
    then every other live node.
    """

    def __init__(self, consortium, index, chunk_hash, designation, stats):
        self.consortium = consortium
        self.index = index
        self.chunk_hash = chunk_hash
        self.designation = designation      # (organization, node)
        self.stats = stats
        self.current = None
        self.process = None

    def start(self):
        self.process = self.consortium.network.env.process(self._run())
        return self.process

    def stop(self):
        if self.current is not None:
            self.current.cancel()
        if self.process is not None and self.process.is_alive:
            self.process.interrupt("enough chunks")

    def _run(self):
        try:
            return (yield from self._locate())
        except simpy.Interrupt:
            if self.current is not None:
                self.current.cancel()
            return None

    def _download(self, holder):
        net = self.consortium.network
        node = self.consortium.nodes[holder]
        if not net.is_alive(holder):
            return None
        reply = node.fetch_chunk(self.chunk_hash)
        if not reply.ok:
            return None
        self.current = net.transfer(holder, self.consortium.client, len(reply.data))
        try:
            yield self.current.done
        except TransferFailed:
            return None
        finally:
            self.current = None
        return reply.data

    def _ask(self, identity):
        """Ask a node about the chunk: data, or a one-hop redirect."""
        net = self.consortium.network
        if not net.is_alive(identity):
            return None
        reply = self.consortium.nodes[identity].fetch_chunk(self.chunk_hash)
        if reply.ok:
            return (yield from self._download(identity))
        if reply.kind == msg.REDIRECT:
            yield net.env.timeout(net.rtt(self.consortium.client, identity))
            self.stats.redirects += 1
            logger.debug("Chunk %s redirected from %s to %s",
                         self.chunk_hash[:12], identity, reply.holder)
            return (yield from self._download(reply.holder))
        return None

    def _locate(self):
        consortium = self.consortium
        org, designated = self.designation
        data = yield from self._ask(designated)
        if data is not None:
            return data

        master = consortium.masters.get(org)
        if master is not None and master != designated:
            data = yield from self._ask(master)
            if data is not None:
                self.stats.fallbacks += 1
                logger.warning("Chunk %s served through master %s, %s did not answer",
                               self.chunk_hash[:12], master, designated)
                return data

        net = consortium.network
        others = [n for n in sorted(consortium.nodes)
                  if n not in (designated, master) and net.is_alive(n)]
        if not others:
            return None
        yield net.env.timeout(max(net.rtt(consortium.client, n) for n in others))
        for candidate in others:
            if consortium.nodes[candidate].has_chunk(self.chunk_hash):
                self.stats.fallbacks += 1
                logger.warning("Chunk %s found on %s by asking every node",
                               self.chunk_hash[:12], candidate)
                return (yield from self._download(candidate))
        return None
