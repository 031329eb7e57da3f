from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster


class Command(ClusterCommand):
    help = "Bring a failed DBNode, or every node of an organization, back."

    def add_arguments(self, parser):
        parser.add_argument("name", help="Node or organization")

    def run(self, *args, **options):
        Cluster.load().revive(options["name"])
        self.stdout.write(self.style.SUCCESS(f"{options['name']} is back"))
