# apps/cluster/runtime.py
"""
The operator cluster: registry rows, directory-backed DBNodes and the ledger
channel, loaded fresh for every management command and saved back after it.
"""
import json
import logging
import shutil
from pathlib import Path

from django.conf import settings
from django.db import transaction

from apps.core.exceptions import ConfigurationError, NotInitialized
from apps.ledger.contract import FileChannelContract
from apps.nodes.node import NodeRole
from apps.nodes.stores import DirectoryChunkStore
from apps.protocol.client import read_file, write_file

from .config import ClusterSpec, parse_config
from .models import ClusterConfig, Organization, StorageNode

logger = logging.getLogger(__name__)

STATE_FILE = "state.json"


def spec_from_record(record: ClusterConfig) -> ClusterSpec:
    return parse_config({
        "cluster": {"name": record.name, "chunk_size": record.chunk_size, "seed": record.seed},
        "code": {"n": record.n, "k": record.k, "l": record.l, "x": record.x, "y": record.y},
        "network": {"rtt_intra_ms": record.rtt_intra_ms, "rtt_inter_ms": record.rtt_inter_ms},
        "client": {
            "name": record.client_name,
            "organization": record.client_organization or None,
            "bandwidth": record.client_bandwidth,
        },
        "organizations": [
            {"name": org.name,
             "nodes": [{"name": n.name, "bandwidth": n.bandwidth, "capacity": n.capacity}
                       for n in org.nodes.all()]}
            for org in record.organizations.all()
        ],
    })


class Cluster:

    def __init__(self, record: ClusterConfig, spec: ClusterSpec):
        self.record = record
        self.spec = spec
        self.ledger = FileChannelContract(record.channel)
        stores = {node: DirectoryChunkStore(node) for node in spec.topology.nodes}
        self.consortium = spec.build_consortium(self.ledger, stores)

    @property
    def nodes(self) -> dict:
        return self.consortium.nodes

    @staticmethod
    def node_dir(node: str) -> Path:
        return Path(settings.NODE_STORAGE_ROOT) / node

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    @transaction.atomic
    def initialize(cls, spec: ClusterSpec, source: str = "", reset: bool = False) -> "Cluster":
        existing = ClusterConfig.objects.first()
        if existing is not None and not reset:
            raise ConfigurationError(
                f"cluster {existing.name!r} is already initialized; pass --reset to replace it")
        stale = set(spec.topology.nodes)
        if existing is not None:
            stale |= set(StorageNode.objects.filter(organization__cluster=existing)
                         .values_list("name", flat=True))
            existing.delete()
        for node in sorted(stale):
            shutil.rmtree(cls.node_dir(node), ignore_errors=True)

        channel = settings.DBNODE["CHANNEL"]
        FileChannelContract(channel).drop_channel()
        p = spec.params
        record = ClusterConfig.objects.create(
            name=spec.name, channel=channel, chunk_size=spec.chunk_size, seed=spec.seed,
            n=p.n, k=p.k, l=p.l, x=p.x, y=p.y,
            rtt_intra_ms=spec.topology.rtt_intra_ms, rtt_inter_ms=spec.topology.rtt_inter_ms,
            client_name=spec.client_name, client_organization=spec.client_organization or "",
            client_bandwidth=spec.client_bandwidth, source=source,
        )
        for org, members in spec.topology.organizations.items():
            organization = Organization.objects.create(cluster=record, name=org)
            for node in members:
                StorageNode.objects.create(
                    organization=organization, name=node,
                    bandwidth=spec.topology.bandwidth[node],
                    capacity=spec.topology.capacity[node],
                )

        cluster = cls(record, spec)
        version = cluster.consortium.publish()
        cluster.save()
        logger.info("Cluster %s initialized: %d nodes in %d organizations, tables v%d",
                    spec.name, spec.topology.N, spec.topology.M, version)
        return cluster

    @classmethod
    def load(cls) -> "Cluster":
        record = ClusterConfig.objects.prefetch_related("organizations__nodes").first()
        if record is None:
            raise NotInitialized("cluster not initialized; run init_cluster first")
        cluster = cls(record, spec_from_record(record))
        for name, node in cluster.nodes.items():
            path = cls.node_dir(name) / STATE_FILE
            if path.is_file():
                node.load_state(json.loads(path.read_text(encoding="utf-8")))
        for name, node in sorted(cluster.nodes.items()):
            if not node.alive:
                cluster.consortium.kill_node(name)
        cluster.consortium.refresh()
        return cluster

    def save(self) -> None:
        for name, node in self.nodes.items():
            directory = self.node_dir(name)
            directory.mkdir(parents=True, exist_ok=True)
            (directory / STATE_FILE).write_text(
                json.dumps(node.to_state(), indent=1, sort_keys=True), encoding="utf-8")
        for row in StorageNode.objects.filter(organization__cluster=self.record):
            node = self.nodes[row.name]
            role = NodeRole.MASTER if node.is_master else NodeRole.COMMON
            if (row.alive, row.role) != (node.alive, role):
                row.alive, row.role = node.alive, role
                row.save(update_fields=["alive", "role"])

    # -- operations --------------------------------------------------------

    def put(self, data: bytes, owner: str | None = None, policy=None, exclusions=(),
            sequential: bool = False):
        try:
            return write_file(self.consortium, owner or self.spec.client_name, data, policy,
                              exclusions, sequential)
        finally:
            self.save()

    def get(self, fid: str, requester: str | None = None, sequential: bool = False):
        try:
            return read_file(self.consortium, requester or self.spec.client_name, fid, sequential)
        finally:
            self.save()

    def kill_node(self, node: str) -> None:
        self.consortium.kill_node(node)
        self.save()

    def kill_org(self, organization: str) -> None:
        self.consortium.kill_org(organization)
        self.save()

    def revive(self, name: str) -> None:
        self.consortium.revive(name)
        self.save()

    def export_trace(self, path) -> None:
        self.consortium.network.export_trace(path)

    def stats(self) -> dict:
        links = self.consortium.link_stats()
        return {
            "files": len(self.ledger.file_ids()),
            "stored_bytes": {n: node.stored_bytes for n, node in sorted(self.nodes.items())},
            **links,
        }
