from tabulate import tabulate

from apps.cluster.management.base import ClusterCommand
from apps.cluster.runtime import Cluster


class Command(ClusterCommand):
    help = "Show the published slot tables, masters and node status."

    def add_arguments(self, parser):
        parser.add_argument("--canonical", action="store_true",
                            help="Print the canonical text stored on the ledger")
        parser.add_argument("--stats", action="store_true", help="Add link and storage metering")

    def run(self, *args, **options):
        cluster = Cluster.load()
        if options["canonical"]:
            self.stdout.write(cluster.ledger.get_slot_tables_text())
            return

        tables = cluster.consortium.tables
        masters = cluster.consortium.masters
        inter = [(org, masters.get(org, "-"), last - first + 1, f"{first}-{last}")
                 for org, first, last in tables.inter.ranges()]
        self.stdout.write(f"Slot tables v{cluster.ledger.slot_tables_version()}")
        self.stdout.write(tabulate(inter, headers=["organization", "master", "slots", "range"]))

        stats = cluster.stats() if options["stats"] else None
        rows = []
        for org in tables.organizations:
            intra = tables.intra[org]
            for node, count in zip(intra.targets, intra.counts):
                row = [org, node, count, "up" if cluster.nodes[node].alive else "down",
                       cluster.nodes[node].role]
                if stats:
                    row += [stats["stored_bytes"][node], stats["per_node"][node]]
                rows.append(row)
        headers = ["organization", "node", "slots", "state", "role"]
        if stats:
            headers += ["stored bytes", "links"]
        self.stdout.write("")
        self.stdout.write(tabulate(rows, headers=headers))
        if stats:
            self.stdout.write("")
            self.stdout.write(
                f"files: {stats['files']}  links: {stats['link_copies']} copies, "
                f"{stats['link_bytes']} bytes, at most {stats['max_links_per_node']} on one node")
