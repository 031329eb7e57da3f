from pathlib import Path

from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster


class Command(ClusterCommand):
    help = "Read a file from the cluster into a local path."

    def add_arguments(self, parser):
        parser.add_argument("fid", help="File identifier printed by put_file")
        parser.add_argument("out", help="Where to write the file")
        parser.add_argument("--as", dest="requester", help="Identity of the reader (default: the client name)")
        parser.add_argument("--sequential", action="store_true", help="Fetch stripes one at a time")
        parser.add_argument("--trace", metavar="CSV", help="Write the network event trace here")

    def run(self, *args, **options):
        cluster = Cluster.load()
        result = cluster.get(options["fid"], options["requester"], options["sequential"])
        Path(options["out"]).write_bytes(result.data)
        if options["trace"]:
            cluster.export_trace(options["trace"])
        self.stdout.write(self.style.SUCCESS(
            f"{len(result.data)} bytes written to {options['out']} in {result.latency_ms:.3f} ms simulated"))
        if result.purged:
            self.stdout.write(self.style.WARNING("Last token used; the file has been deleted"))
