# apps/simnet/topology.py
from dataclasses import dataclass, field

from apps.core.exceptions import ConfigurationError


@dataclass(frozen=True)
class ClusterTopology:
    organizations: dict                 # org -> tuple of node identities
    bandwidth: dict                     # node -> Mbps
    rtt_intra_ms: float = 1.0
    rtt_inter_ms: float = 10.0
    seed: int = 0
    capacity: dict = field(default_factory=dict)   # node -> bytes

    def __post_init__(self):
        seen = {}
        for org, nodes in self.organizations.items():
            for node in nodes:
                if node in seen:
                    raise ConfigurationError(f"{node} belongs to both {seen[node]} and {org}")
                seen[node] = org
                if self.bandwidth.get(node, 0) <= 0:
                    raise ConfigurationError(f"{node} needs a positive bandwidth", node=node)
        if self.rtt_intra_ms < 0 or self.rtt_inter_ms < 0:
            raise ConfigurationError("round-trip times cannot be negative")
        object.__setattr__(self, "_org_of", seen)

    def org_of(self, node: str) -> str:
        return self._org_of[node]

    @property
    def nodes(self) -> list[str]:
        return sorted(self._org_of)

    @property
    def N(self) -> int:
        return len(self._org_of)

    @property
    def M(self) -> int:
        return len(self.organizations)
