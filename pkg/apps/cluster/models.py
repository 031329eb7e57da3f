from django.db import models

from apps.core.constants import DEFAULT_CHANNEL
from apps.nodes.node import NodeRole


class ClusterConfig(models.Model):
    """The operator cluster as declared by its YAML configuration."""

    name = models.CharField(max_length=128, unique=True)
    channel = models.CharField(max_length=64, default=DEFAULT_CHANNEL)
    chunk_size = models.PositiveIntegerField()
    seed = models.IntegerField(default=0)

    # code parameters; N and M follow from the registry rows
    n = models.PositiveSmallIntegerField()
    k = models.PositiveSmallIntegerField()
    l = models.PositiveSmallIntegerField()  # noqa: E741
    x = models.PositiveSmallIntegerField()
    y = models.PositiveSmallIntegerField()

    rtt_intra_ms = models.FloatField(default=1.0)
    rtt_inter_ms = models.FloatField(default=10.0)

    client_name = models.CharField(max_length=128, default="client")
    client_organization = models.CharField(max_length=128, blank=True)
    client_bandwidth = models.FloatField(help_text="Mbps")

    source = models.TextField(blank=True, help_text="YAML document the cluster was built from")
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = "cluster_configs"
        ordering = ["-created_at"]

    def __str__(self):
        return f"{self.name} ({self.n},{self.k}) on {self.channel}"


class Organization(models.Model):
    cluster = models.ForeignKey(ClusterConfig, on_delete=models.CASCADE, related_name="organizations")
    name = models.CharField(max_length=128)

    class Meta:
        db_table = "cluster_organizations"
        ordering = ["cluster", "name"]
        constraints = [
            models.UniqueConstraint(fields=["cluster", "name"], name="unique_organization_per_cluster")
        ]

    def __str__(self):
        return self.name


class StorageNode(models.Model):
    organization = models.ForeignKey(Organization, on_delete=models.CASCADE, related_name="nodes")
    name = models.CharField(max_length=128, unique=True)
    bandwidth = models.FloatField(help_text="Mbps")
    capacity = models.BigIntegerField(help_text="bytes")
    role = models.CharField(max_length=10, choices=NodeRole.choices, default=NodeRole.COMMON)
    alive = models.BooleanField(default=True)

    class Meta:
        db_table = "cluster_storage_nodes"
        ordering = ["organization", "name"]

    def __str__(self):
        return f"{self.name} ({self.role})"


class ExperimentRun(models.Model):

    class Kind(models.TextChoices):
        LINKS = "links", "Link overhead"
        LATENCY = "latency", "Read/write latency"

    class Status(models.TextChoices):
        PENDING = "pending", "Pending"
        RUNNING = "running", "Running"
        FINISHED = "finished", "Finished"
        FAILED = "failed", "Failed"

    kind = models.CharField(max_length=10, choices=Kind.choices)
    status = models.CharField(max_length=10, choices=Status.choices, default=Status.PENDING)
    parameters = models.JSONField(default=dict, blank=True)
    trials = models.PositiveIntegerField()
    csv = models.TextField(blank=True)
    error = models.TextField(blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        db_table = "cluster_experiment_runs"
        ordering = ["-created_at"]
        indexes = [models.Index(fields=["kind", "status"], name="cluster_run_kind_status_idx")]

    def __str__(self):
        return f"{self.get_kind_display()} #{self.pk} ({self.status})"
