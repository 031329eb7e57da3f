# apps/protocol/consortium.py
"""
A running consortium: topology, simulated network, DBNodes and the ledger
channel they publish to.
"""
import logging

from apps.core.exceptions import ConfigurationError
from apps.erasure.params import CodeParams
from apps.hashslot.tables import SlotTables
from apps.ledger.contract import FileChannelContract
from apps.nodes.distribution import purge_everywhere
from apps.nodes.node import DBNode, NodeRole
from apps.placement.state import PlacementState
from apps.simnet.network import Network
from apps.simnet.topology import ClusterTopology

logger = logging.getLogger(__name__)

CLIENT_ENDPOINT = "client"
DEFAULT_CAPACITY = 10**12


def elect_master(nodes, bandwidth: dict) -> str:
    """Highest bandwidth wins; ties go to the lowest identity."""
    return min(nodes, key=lambda n: (-bandwidth[n], n))


class Consortium:

    def __init__(self, topology: ClusterTopology, params: CodeParams, chunk_size: int,
                 ledger: FileChannelContract | None = None, client_bandwidth: float = 4000,
                 client_organization: str | None = None, stores=None):
        if chunk_size <= 0:
            raise ConfigurationError(f"chunk size must be positive, got {chunk_size}")
        if client_organization is not None and client_organization not in topology.organizations:
            raise ConfigurationError(f"client home {client_organization!r} is not an organization")
        self.topology = topology
        self.params = params
        self.chunk_size = chunk_size
        self.ledger = ledger or FileChannelContract()
        self.network = Network(topology)
        self.client = CLIENT_ENDPOINT
        self.network.add_endpoint(self.client, client_bandwidth, client_organization)
        stores = stores or {}
        self.nodes = {
            node: DBNode(node, topology.org_of(node),
                         capacity=topology.capacity.get(node, DEFAULT_CAPACITY),
                         bandwidth=topology.bandwidth[node],
                         store=stores.get(node))
            for node in topology.nodes
        }
        for node in self.nodes.values():
            node.peers = {n: self.nodes[n] for n in topology.organizations[node.organization]}
        self._masters = None
        self._tables = None

    # -- ledger-facing setup -----------------------------------------------

    def build_tables(self) -> SlotTables:
        bw = self.topology.bandwidth
        master_bw = {org: bw[elect_master(nodes, bw)]
                     for org, nodes in self.topology.organizations.items()}
        capacities = {org: {n: self.nodes[n].capacity for n in nodes}
                      for org, nodes in self.topology.organizations.items()}
        return SlotTables.build(master_bw, capacities)

    def publish(self) -> int:
        """Publish slot tables and run the master election on the ledger."""
        version = self.ledger.put_slot_tables(self.build_tables())
        for org, members in self.topology.organizations.items():
            for node in members:
                self.ledger.register_master(org, node, self.topology.bandwidth[node])
        self.refresh()
        return version

    def refresh(self) -> None:
        self._masters = self.ledger.masters()
        self._tables = self.ledger.get_slot_tables()
        for node in self.nodes.values():
            is_master = self._masters.get(node.organization) == node.identity
            node.role = NodeRole.MASTER if is_master else NodeRole.COMMON

    @property
    def masters(self) -> dict:
        if self._masters is None:
            self.refresh()
        return self._masters

    @property
    def tables(self) -> SlotTables:
        if self._tables is None:
            self.refresh()
        return self._tables

    def members(self, organization: str) -> list:
        return [self.nodes[n] for n in self.topology.organizations[organization]]

    def placement_state(self) -> PlacementState:
        """Merge of every master's view of its organization."""
        snapshots = []
        for org, master in sorted(self.masters.items()):
            snapshots.append(self.nodes[master].snapshot(self.members(org)))
        return PlacementState.merge(snapshots)

    # -- failure injection -------------------------------------------------

    def kill_node(self, node: str) -> None:
        if node not in self.nodes:
            raise ConfigurationError(f"unknown node {node!r}")
        self.nodes[node].alive = False
        self.network.kill_node(node)

    def kill_org(self, organization: str) -> None:
        if organization not in self.topology.organizations:
            raise ConfigurationError(f"unknown organization {organization!r}")
        for node in self.topology.organizations[organization]:
            self.kill_node(node)

    def revive(self, name: str) -> None:
        if name in self.topology.organizations:
            targets = self.topology.organizations[name]
        elif name in self.nodes:
            targets = [name]
        else:
            raise ConfigurationError(f"unknown node or organization {name!r}")
        self.network.revive(name)
        for node in targets:
            self.nodes[node].alive = True

    # -- bookkeeping -------------------------------------------------------

    def purge(self, fid: str) -> int:
        return purge_everywhere(fid, self.nodes, self.masters)

    def references(self, fid: str) -> int:
        return sum(n.chunk_references(fid) for n in self.nodes.values())

    def link_stats(self) -> dict:
        per_node = {n: node.link_count for n, node in sorted(self.nodes.items())}
        return {
            "per_node": per_node,
            "max_links_per_node": max(per_node.values(), default=0),
            "link_copies": sum(per_node.values()),
            "link_bytes": sum(node.link_bytes for node in self.nodes.values()),
        }
