from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster


class Command(ClusterCommand):
    help = "Mark a DBNode as failed."

    def add_arguments(self, parser):
        parser.add_argument("node")

    def run(self, *args, **options):
        Cluster.load().kill_node(options["node"])
        self.stdout.write(self.style.WARNING(f"{options['node']} is down"))
