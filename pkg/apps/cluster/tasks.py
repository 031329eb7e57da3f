import logging

from celery import shared_task
from django.utils import timezone

from .experiments import bench_latency, bench_links, to_csv
from .models import ExperimentRun

logger = logging.getLogger(__name__)


def _execute(run: ExperimentRun, experiment, **kwargs) -> int:
    run.status = ExperimentRun.Status.RUNNING
    run.save(update_fields=["status"])
    try:
        frame = experiment(**kwargs)
    except Exception as exc:
        logger.exception("Experiment run %s failed", run.pk)
        run.status = ExperimentRun.Status.FAILED
        run.error = str(exc)
        run.finished_at = timezone.now()
        run.save(update_fields=["status", "error", "finished_at"])
        raise
    run.csv = to_csv(frame)
    run.status = ExperimentRun.Status.FINISHED
    run.finished_at = timezone.now()
    run.save(update_fields=["csv", "status", "finished_at"])
    return run.pk


@shared_task
def run_bench_links_task(run_id: int) -> int:
    """Run a link overhead experiment recorded as an ExperimentRun."""
    run = ExperimentRun.objects.get(pk=run_id)
    p = run.parameters
    return _execute(run, bench_links, max_chunks=p["max_chunks"], step=p["step"],
                    trials=run.trials, seed=p["seed"], chunk_bytes=p["chunk_bytes"])


@shared_task
def run_bench_latency_task(run_id: int) -> int:
    run = ExperimentRun.objects.get(pk=run_id)
    p = run.parameters
    return _execute(run, bench_latency, mode=p["mode"], sizes_mb=p["sizes_mb"],
                    trials=run.trials, seed=p["seed"], sequential=p["sequential"],
                    chunk_size=p.get("chunk_size"))
