from django.db import models

from apps.core.constants import DEFAULT_CHANNEL


class SlotTableVersion(models.Model):
    """One published version of the inter and intra slot tables."""

    channel = models.CharField(max_length=64, default=DEFAULT_CHANNEL, db_index=True)
    version = models.PositiveIntegerField()
    canonical_text = models.TextField()
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = "ledger_slot_table_versions"
        ordering = ["channel", "-version"]
        constraints = [
            models.UniqueConstraint(
                fields=["channel", "version"],
                name="unique_slot_table_version_per_channel",
            )
        ]

    def __str__(self):
        return f"{self.channel} slot tables v{self.version}"


class MasterRegistration(models.Model):
    """A node's bid to be its organization's master."""

    channel = models.CharField(max_length=64, default=DEFAULT_CHANNEL, db_index=True)
    organization = models.CharField(max_length=128)
    node = models.CharField(max_length=128)
    bandwidth = models.FloatField(help_text="Mbps")
    registered_at = models.DateTimeField(auto_now=True)

    class Meta:
        db_table = "ledger_master_registrations"
        ordering = ["channel", "organization", "-bandwidth", "node"]
        constraints = [
            models.UniqueConstraint(
                fields=["channel", "organization", "node"],
                name="unique_master_registration",
            )
        ]

    def __str__(self):
        return f"{self.node} ({self.organization}, {self.bandwidth:g} Mbps)"


class FileRecord(models.Model):
    channel = models.CharField(max_length=64, default=DEFAULT_CHANNEL, db_index=True)
    fid = models.CharField(max_length=64)
    owner = models.CharField(max_length=128)
    original_length = models.BigIntegerField()
    stripe_count = models.PositiveIntegerField()
    tree_text = models.TextField()
    permission_list = models.JSONField(default=list, blank=True)
    banned_list = models.JSONField(default=list, blank=True)
    tokens = models.PositiveIntegerField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = "ledger_file_records"
        ordering = ["-created_at"]
        constraints = [
            models.UniqueConstraint(fields=["channel", "fid"], name="unique_fid_per_channel")
        ]

    def __str__(self):
        return f"{self.fid[:12]} by {self.owner}"
