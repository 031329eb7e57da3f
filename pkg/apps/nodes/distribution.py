# apps/nodes/distribution.py
"""
Master-side placement of a stripe inside one organization, and file purge
across the consortium.
"""
import logging
from dataclasses import dataclass, field

from apps.core.exceptions import DBNodeError, TransferFailed, WriteFailed

from . import messages as msg

logger = logging.getLogger(__name__)


@dataclass
class DistributeReport:
    organization: str
    acks: list = field(default_factory=list)
    link_copies: list = field(default_factory=list)    # (node, chunk hash)
    failed: list = field(default_factory=list)         # (node, chunk hash, reason)


def master_distribute(master, plan, payloads: dict, owner: str, nodes: dict) -> DistributeReport:
    """
    Store this organization's share of a planned stripe.

    Chunks whose holder lies in the master's organization go to their holder;
    links for chunks designated to this organization are written to the
    designated node and to the master's directory, once when they are the
    same node. Any chunk store failure undoes the
    chunks this call stored and raises WriteFailed with the report attached.
    """
    org = master.organization
    report = DistributeReport(org)

    for entry in plan.entries:
        if entry.holder_org != org:
            continue
        holder = nodes[entry.holder]
        try:
            ack = holder.handle(msg.StoreChunk(entry.chunk_hash, payloads[entry.chunk_hash], owner))
        except DBNodeError as exc:
            report.failed.append((entry.holder, entry.chunk_hash, str(exc)))
            for done in report.acks:
                nodes[done.node].delete_chunk(done.chunk_hash, owner)
                master.table.forget(done.chunk_hash, done.node)
            logger.warning("Stripe %s aborted in %s: %s", plan.stripe_hash[:12], org, exc)
            raise WriteFailed(f"{org} could not store chunk {entry.index}: {exc}",
                              report=report) from exc
        report.acks.append(ack)
        master.table.record(entry.chunk_hash, entry.holder)

    members = {n for n, node in nodes.items() if node.organization == org}
    for target, designated in plan.mirrors_opened:
        if designated in members:
            master.table.pending.setdefault(target, []).append(designated)
    for designated, target in plan.mirrors_closed:
        partners = master.table.pending.get(designated, [])
        if target in partners:
            partners.remove(target)
        if not partners:
            master.table.pending.pop(designated, None)

    by_hash = {e.chunk_hash: e for e in plan.entries if e.diverted}
    for link in plan.links:
        entry = by_hash.get(link.chunk_hash)
        if entry is None or entry.designated_org != org:
            continue
        master.table.sequence = max(master.table.sequence, link.created_at)
        for copy_at in dict.fromkeys((entry.designated_node, master.identity)):
            try:
                if nodes[copy_at].handle(msg.StoreLink(link, owner)):
                    report.link_copies.append((copy_at, link.chunk_hash))
            except TransferFailed:
                logger.warning("Link copy for %s skipped, %s unreachable",
                               link.chunk_hash[:12], copy_at)
    return report


def purge_everywhere(fid: str, nodes: dict, masters: dict | None = None) -> int:
    """Delete every chunk and link reference owned by `fid`; returns bytes freed."""
    freed = 0
    masters = masters or {}
    for identity in sorted(nodes):
        node = nodes[identity]
        before = set(node.chunk_owners)
        freed += node.purge_file(fid)
        master = nodes.get(masters.get(node.organization))
        if master is not None:
            for chunk_hash in before - set(node.chunk_owners):
                master.table.forget(chunk_hash, identity)
    if freed:
        logger.info("Purged file %s, %d bytes freed", fid[:12], freed)
    return freed
