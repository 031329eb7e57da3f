from django.conf import settings

from apps.cluster.experiments import STEPPED, UNIFORM
from apps.cluster.management.base import ClusterCommand
from apps.cluster.models import ExperimentRun
from apps.cluster.tasks import run_bench_latency_task


class Command(ClusterCommand):
    help = ("Mean simulated write/read latency of the coded store and the full-copy baseline "
            "on four organizations of three nodes. CSV columns: size_mb,system,op,mean_latency_ms.")

    def add_arguments(self, parser):
        mode = parser.add_mutually_exclusive_group(required=True)
        mode.add_argument("--uniform", dest="mode", action="store_const", const=UNIFORM,
                          help="Every node at the uniform bandwidth")
        mode.add_argument("--stepped", dest="mode", action="store_const", const=STEPPED,
                          help="One bandwidth step per organization")
        parser.add_argument("--sizes", type=float, nargs="+", default=settings.DBNODE["BENCH_SIZES_MB"],
                            metavar="MB")
        parser.add_argument("--trials", type=int, default=settings.DBNODE["TRIALS"])
        parser.add_argument("--seed", type=int, default=settings.DBNODE["SEED"])
        parser.add_argument("--chunk-size", type=int, default=settings.DBNODE["CHUNK_SIZE"])
        parser.add_argument("--sequential", action="store_true", help="Disable stripe pipelining")
        parser.add_argument("--out", help="Write the CSV here instead of stdout")
        parser.add_argument("--enqueue", action="store_true", help="Hand the run to a Celery worker")

    def run(self, *args, **options):
        sizes = [int(s) if float(s).is_integer() else s for s in options["sizes"]]
        run = ExperimentRun.objects.create(
            kind=ExperimentRun.Kind.LATENCY,
            trials=options["trials"],
            parameters={
                "mode": options["mode"],
                "sizes_mb": sizes,
                "seed": options["seed"],
                "sequential": options["sequential"],
                "chunk_size": options["chunk_size"],
            },
        )
        if options["enqueue"]:
            result = run_bench_latency_task.delay(run.pk)
            self.stdout.write(f"experiment run {run.pk} queued as task {result.id}")
            return
        run_bench_latency_task(run.pk)
        run.refresh_from_db()
        self.emit(run.csv, options["out"])
