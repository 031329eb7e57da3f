# apps/cluster/config.py
"""
Cluster configuration documents (YAML).

    cluster:       {name, chunk_size, seed}
    code:          {n, k, l, x, y}           N and M come from the organizations
    network:       {rtt_intra_ms, rtt_inter_ms}
    client:        {name, organization, bandwidth}
    organizations: [{name, nodes: [{name, bandwidth, capacity}]}]
"""
import logging
from dataclasses import dataclass
from pathlib import Path

import yaml
from rest_framework.exceptions import ValidationError

from apps.core.exceptions import ConfigurationError
from apps.erasure.params import CodeParams
from apps.protocol.consortium import Consortium
from apps.simnet.topology import ClusterTopology

from .serializers import ClusterFileSerializer

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClusterSpec:
    name: str
    chunk_size: int
    seed: int
    params: CodeParams
    topology: ClusterTopology
    client_name: str = "client"
    client_organization: str | None = None
    client_bandwidth: float = 4000

    def build_consortium(self, ledger, stores=None) -> Consortium:
        return Consortium(self.topology, self.params, self.chunk_size, ledger,
                          client_bandwidth=self.client_bandwidth,
                          client_organization=self.client_organization,
                          stores=stores)


def _flatten(detail, prefix=""):
    if isinstance(detail, dict):
        for key, value in detail.items():
            yield from _flatten(value, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(detail, list) and detail and not isinstance(detail[0], str):
        for index, value in enumerate(detail):
            if value:
                yield from _flatten(value, f"{prefix}[{index}]")
    else:
        messages = detail if isinstance(detail, list) else [detail]
        for message in messages:
            yield f"{prefix or 'config'}: {message}"


def parse_config(document: dict) -> ClusterSpec:
    if not isinstance(document, dict):
        raise ConfigurationError("cluster configuration must be a mapping")
    serializer = ClusterFileSerializer(data=document)
    try:
        serializer.is_valid(raise_exception=True)
    except ValidationError as exc:
        problems = list(_flatten(exc.detail))
        raise ConfigurationError("invalid cluster configuration: " + "; ".join(problems),
                                 problems=problems) from exc
    data = serializer.validated_data

    organizations = {o["name"]: tuple(n["name"] for n in o["nodes"]) for o in data["organizations"]}
    nodes = [n for o in data["organizations"] for n in o["nodes"]]
    topology = ClusterTopology(
        organizations=organizations,
        bandwidth={n["name"]: n["bandwidth"] for n in nodes},
        rtt_intra_ms=data["network"]["rtt_intra_ms"],
        rtt_inter_ms=data["network"]["rtt_inter_ms"],
        seed=data["cluster"]["seed"],
        capacity={n["name"]: n["capacity"] for n in nodes},
    )
    code = data["code"]
    params = CodeParams(N=topology.N, M=topology.M, x=code["x"], y=code["y"],
                        n=code["n"], k=code["k"], l=code["l"]).require_valid()

    client = data["client"]
    if client["name"] in topology.nodes or client["name"] in organizations:
        raise ConfigurationError(f"client name {client['name']!r} collides with the cluster")
    return ClusterSpec(
        name=data["cluster"]["name"],
        chunk_size=data["cluster"]["chunk_size"],
        seed=data["cluster"]["seed"],
        params=params,
        topology=topology,
        client_name=client["name"],
        client_organization=client["organization"],
        client_bandwidth=client["bandwidth"],
    )


def load_config_text(text: str) -> ClusterSpec:
    try:
        document = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cluster configuration is not valid YAML: {exc}") from exc
    return parse_config(document)


def load_config(path) -> ClusterSpec:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"configuration file {path} does not exist", path=str(path))
    spec = load_config_text(path.read_text(encoding="utf-8"))
    logger.info("Loaded cluster %s from %s (N=%d, M=%d)", spec.name, path,
                spec.topology.N, spec.topology.M)
    return spec


def uniform_organizations(orgs: int, per_org: int, bandwidths) -> dict:
    """org-1..org-M with nodes org-i-n1..; `bandwidths` gives one value per organization."""
    return {
        f"org-{i}": [{"name": f"org-{i}-n{j}", "bandwidth": bandwidths[i - 1]}
                     for j in range(1, per_org + 1)]
        for i in range(1, orgs + 1)
    }


def synthetic_spec(orgs: int, per_org: int, bandwidths, code: dict, chunk_size: int,
                   seed: int = 0, rtt_intra_ms: float = 1.0, rtt_inter_ms: float = 10.0,
                   client_bandwidth: float = 4000, capacity: int = 10**12) -> ClusterSpec:
    """Benchmark topologies built in code instead of a YAML file."""
    layout = uniform_organizations(orgs, per_org, bandwidths)
    return parse_config({
        "cluster": {"name": f"bench-{orgs}x{per_org}", "chunk_size": chunk_size, "seed": seed},
        "code": code,
        "network": {"rtt_intra_ms": rtt_intra_ms, "rtt_inter_ms": rtt_inter_ms},
        "client": {"name": "client", "bandwidth": client_bandwidth},
        "organizations": [
            {"name": org, "nodes": [dict(n, capacity=capacity) for n in nodes]}
            for org, nodes in layout.items()
        ],
    })
