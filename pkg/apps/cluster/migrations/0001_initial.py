# Generated manually for apps.cluster

import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name="ClusterConfig",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("name", models.CharField(max_length=128, unique=True)),
                ("channel", models.CharField(default="fc", max_length=64)),
                ("chunk_size", models.PositiveIntegerField()),
                ("seed", models.IntegerField(default=0)),
                ("n", models.PositiveSmallIntegerField()),
                ("k", models.PositiveSmallIntegerField()),
                ("l", models.PositiveSmallIntegerField()),
                ("x", models.PositiveSmallIntegerField()),
                ("y", models.PositiveSmallIntegerField()),
                ("rtt_intra_ms", models.FloatField(default=1.0)),
                ("rtt_inter_ms", models.FloatField(default=10.0)),
                ("client_name", models.CharField(default="client", max_length=128)),
                ("client_organization", models.CharField(blank=True, max_length=128)),
                ("client_bandwidth", models.FloatField(help_text="Mbps")),
                ("source", models.TextField(blank=True, help_text="YAML document the cluster was built from")),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("updated_at", models.DateTimeField(auto_now=True)),
            ],
            options={
                "db_table": "cluster_configs",
                "ordering": ["-created_at"],
            },
        ),
        migrations.CreateModel(
            name="Organization",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("name", models.CharField(max_length=128)),
                ("cluster", models.ForeignKey(
                    on_delete=django.db.models.deletion.CASCADE,
                    related_name="organizations",
                    to="cluster.clusterconfig",
                )),
            ],
            options={
                "db_table": "cluster_organizations",
                "ordering": ["cluster", "name"],
            },
        ),
        migrations.CreateModel(
            name="StorageNode",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("name", models.CharField(max_length=128, unique=True)),
                ("bandwidth", models.FloatField(help_text="Mbps")),
                ("capacity", models.BigIntegerField(help_text="bytes")),
                ("role", models.CharField(
                    choices=[("master", "Master"), ("common", "Common")],
                    default="common",
                    max_length=10,
                )),
                ("alive", models.BooleanField(default=True)),
                ("organization", models.ForeignKey(
                    on_delete=django.db.models.deletion.CASCADE,
                    related_name="nodes",
                    to="cluster.organization",
                )),
            ],
            options={
                "db_table": "cluster_storage_nodes",
                "ordering": ["organization", "name"],
            },
        ),
        migrations.CreateModel(
            name="ExperimentRun",
            fields=[
                ("id", models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name="ID")),
                ("kind", models.CharField(
                    choices=[("links", "Link overhead"), ("latency", "Read/write latency")],
                    max_length=10,
                )),
                ("status", models.CharField(
                    choices=[
                        ("pending", "Pending"),
                        ("running", "Running"),
                        ("finished", "Finished"),
                        ("failed", "Failed"),
                    ],
                    default="pending",
                    max_length=10,
                )),
                ("parameters", models.JSONField(blank=True, default=dict)),
                ("trials", models.PositiveIntegerField()),
                ("csv", models.TextField(blank=True)),
                ("error", models.TextField(blank=True)),
                ("created_at", models.DateTimeField(auto_now_add=True)),
                ("finished_at", models.DateTimeField(blank=True, null=True)),
            ],
            options={
                "db_table": "cluster_experiment_runs",
                "ordering": ["-created_at"],
            },
        ),
        migrations.AddConstraint(
            model_name="organization",
            constraint=models.UniqueConstraint(fields=("cluster", "name"), name="unique_organization_per_cluster"),
        ),
        migrations.AddIndex(
            model_name="experimentrun",
            index=models.Index(fields=["kind", "status"], name="cluster_run_kind_status_idx"),
        ),
    ]
