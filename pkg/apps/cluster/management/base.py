from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import DBNodeError


class ClusterCommand(BaseCommand):
    """Runs `run()` and reports DBNode errors with their documented exit codes."""

    def run(self, *args, **options):
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except DBNodeError as exc:
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=exc.exit_code) from exc

    def emit(self, text: str, out=None) -> None:
        """Write CSV to `out` when given, otherwise to stdout."""
        if out:
            with open(out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            self.stderr.write(f"wrote {out}")
        else:
            self.stdout.write(text, ending="")
