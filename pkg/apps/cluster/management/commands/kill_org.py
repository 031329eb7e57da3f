from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster


class Command(ClusterCommand):
    help = "Mark every DBNode of an organization as failed."

    def add_arguments(self, parser):
        parser.add_argument("organization")

    def run(self, *args, **options):
        Cluster.load().kill_org(options["organization"])
        self.stdout.write(self.style.WARNING(f"{options['organization']} is down"))
