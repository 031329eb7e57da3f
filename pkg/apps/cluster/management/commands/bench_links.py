from django.conf import settings

from apps.cluster.config import load_config
from apps.cluster.experiments import bench_links, to_csv
from apps.cluster.management.base import ClusterCommand
from apps.cluster.models import ExperimentRun
from apps.cluster.tasks import run_bench_links_task


class Command(ClusterCommand):
    help = ("Count link records while storing random chunks. "
            "CSV columns: chunks,max_links_per_node,total_links,link_bytes.")

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Cluster YAML to use instead of the 3x2 reference topology")
        parser.add_argument("--max-chunks", type=int, default=1000)
        parser.add_argument("--step", type=int, default=100)
        parser.add_argument("--trials", type=int, default=settings.DBNODE["TRIALS"])
        parser.add_argument("--seed", type=int, default=settings.DBNODE["SEED"])
        parser.add_argument("--chunk-bytes", type=int, default=settings.DBNODE["CHUNK_SIZE"])
        parser.add_argument("--out", help="Write the CSV here instead of stdout")
        parser.add_argument("--enqueue", action="store_true", help="Hand the run to a Celery worker")

    def run(self, *args, **options):
        if options["config"]:
            # a custom topology runs inline; its spec is not a task argument
            spec = load_config(options["config"])
            frame = bench_links(options["max_chunks"], options["step"], options["trials"],
                                options["seed"], options["chunk_bytes"], spec=spec)
            self.emit(to_csv(frame), options["out"])
            return

        run = ExperimentRun.objects.create(
            kind=ExperimentRun.Kind.LINKS,
            trials=options["trials"],
            parameters={
                "max_chunks": options["max_chunks"],
                "step": options["step"],
                "seed": options["seed"],
                "chunk_bytes": options["chunk_bytes"],
            },
        )
        if options["enqueue"]:
            result = run_bench_links_task.delay(run.pk)
            self.stdout.write(f"experiment run {run.pk} queued as task {result.id}")
            return
        run_bench_links_task(run.pk)
        run.refresh_from_db()
        self.emit(run.csv, options["out"])
