from pathlib import Path

from apps.cluster.config import load_config
from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster


class Command(ClusterCommand):
    help = "Create the cluster from a YAML configuration, publish slot tables and elect masters."

    def add_arguments(self, parser):
        parser.add_argument("config", help="Path to the cluster YAML document")
        parser.add_argument("--reset", action="store_true",
                            help="Replace an existing cluster, its ledger channel and node directories")

    def run(self, *args, **options):
        spec = load_config(options["config"])
        cluster = Cluster.initialize(spec, Path(options["config"]).read_text(encoding="utf-8"),
                                     reset=options["reset"])
        masters = cluster.consortium.masters
        self.stdout.write(self.style.SUCCESS(
            f"Cluster {spec.name}: {spec.topology.N} nodes, {spec.topology.M} organizations, "
            f"({spec.params.n},{spec.params.k}) code"))
        for org in sorted(masters):
            self.stdout.write(f"  {org}: master {masters[org]}")
