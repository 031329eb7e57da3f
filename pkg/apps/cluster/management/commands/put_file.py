from pathlib import Path

from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster
from apps.core.exceptions import ConfigurationError
from apps.ledger.records import AccessPolicy


class Command(ClusterCommand):
    help = "Store a file in the cluster and print its identifier."

    def add_arguments(self, parser):
        parser.add_argument("path")
        parser.add_argument("--as", dest="owner", help="Identity of the writer (default: the client name)")
        parser.add_argument("--permit", nargs="+", default=[], metavar="ID", help="Identities allowed to read")
        parser.add_argument("--ban", nargs="+", default=[], metavar="ID", help="Identities never allowed to read")
        parser.add_argument("--tokens", type=int, help="Number of reads before the file is deleted")
        parser.add_argument("--exclude", nargs="+", default=[], metavar="ORG",
                            help="Organizations that may hold links but no data")
        parser.add_argument("--sequential", action="store_true", help="Send stripes one at a time")
        parser.add_argument("--trace", metavar="CSV", help="Write the network event trace here")

    def run(self, *args, **options):
        path = Path(options["path"])
        if not path.is_file():
            raise ConfigurationError(f"{path} does not exist")
        if options["tokens"] is not None and options["tokens"] < 1:
            raise ConfigurationError("--tokens must be at least 1")
        policy = AccessPolicy(options["permit"], options["ban"], options["tokens"])

        cluster = Cluster.load()
        receipt = cluster.put(path.read_bytes(), options["owner"], policy,
                              options["exclude"], options["sequential"])
        if options["trace"]:
            cluster.export_trace(options["trace"])
        self.stdout.write(receipt.fid)
        self.stderr.write(
            f"{receipt.stripes} stripes, {receipt.chunks} chunks, {receipt.links} links "
            f"({receipt.link_bytes} bytes), {receipt.latency_ms:.3f} ms simulated")
