# Generated manually for apps.ledger

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="SlotTableVersion",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("channel", models.CharField(db_index=True, default="fc", max_length=64)),
                ("version", models.PositiveIntegerField()),
                ("canonical_text", models.TextField()),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "db_table": "ledger_slot_table_versions",
                "ordering": ["channel", "-version"],
            },
        ),
        migrations.CreateModel(
            name="MasterRegistration",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("channel", models.CharField(db_index=True, default="fc", max_length=64)),
                ("organization", models.CharField(max_length=128)),
                ("node", models.CharField(max_length=128)),
                ("bandwidth", models.FloatField(help_text="Mbps")),
                ("registered_at", models.DateTimeField(auto_now=True)),
            ],
            options={
                "db_table": "ledger_master_registrations",
                "ordering": ["channel", "organization", "-bandwidth", "node"],
            },
        ),
        migrations.CreateModel(
            name="FileRecord",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("channel", models.CharField(db_index=True, default="fc", max_length=64)),
                ("fid", models.CharField(max_length=64)),
                ("owner", models.CharField(max_length=128)),
                ("original_length", models.BigIntegerField()),
                ("stripe_count", models.PositiveIntegerField()),
                ("tree_text", models.TextField()),
                ("permission_list", models.JSONField(blank=True, default=list)),
                ("banned_list", models.JSONField(blank=True, default=list)),
                ("tokens", models.PositiveIntegerField(blank=True, null=True)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
            ],
            options={
                "db_table": "ledger_file_records",
                "ordering": ["-created_at"],
            },
        ),
        migrations.AddConstraint(
            model_name="slottableversion",
            constraint=models.UniqueConstraint(
                fields=("channel", "version"), name="unique_slot_table_version_per_channel"
            ),
        ),
        migrations.AddConstraint(
            model_name="masterregistration",
            constraint=models.UniqueConstraint(
                fields=("channel", "organization", "node"), name="unique_master_registration"
            ),
        ),
        migrations.AddConstraint(
            model_name="filerecord",
            constraint=models.UniqueConstraint(fields=("channel", "fid"), name="unique_fid_per_channel"),
        ),
    ]
