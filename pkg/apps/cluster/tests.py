import io
import shutil
import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase, override_settings, tag

from apps.core.constants import LINK_RECORD_BYTES, MB
from apps.core.exceptions import ConfigurationError, ConstraintViolation, NotInitialized
from apps.protocol.client import write_file

from .config import load_config, load_config_text
from .experiments import (
    LATENCY_COLUMNS,
    LINK_COLUMNS,
    bench_latency,
    bench_links,
    reference_spec,
    scratch_consortium,
    to_csv,
)
from .models import ClusterConfig, ExperimentRun, StorageNode
from .runtime import Cluster
from .tasks import run_bench_links_task

SMALL_CLUSTER = """
cluster: {name: small, chunk_size: 1000, seed: 3}
code: {n: 6, k: 3, l: 3, x: 3, y: 1}
organizations:
  - name: org-a
    nodes:
      - {name: a1, bandwidth: 1000, capacity: 1000000}
      - {name: a2, bandwidth: 800, capacity: 1000000}
  - name: org-b
    nodes:
      - {name: b1, bandwidth: 1000, capacity: 1000000}
      - {name: b2, bandwidth: 1000, capacity: 1000000}
  - name: org-c
    nodes:
      - {name: c1, bandwidth: 500, capacity: 1000000}
      - {name: c2, bandwidth: 1500, capacity: 1000000}
"""


class ConfigLoaderTests(SimpleTestCase):

    def test_shipped_configs_load(self):
        spec = load_config(Path(settings.BASE_DIR) / "config" / "reference-3x2.yaml")
        self.assertEqual((spec.topology.N, spec.topology.M), (6, 3))
        self.assertTrue(spec.params.validate().ok)
        for mode in ("uniform", "stepped"):
            spec = load_config(Path(settings.BASE_DIR) / "config" / f"eval-4x3-{mode}.yaml")
            self.assertEqual((spec.topology.N, spec.topology.M), (12, 4))

    def test_defaults_for_optional_sections(self):
        spec = load_config_text(SMALL_CLUSTER)
        self.assertEqual(spec.client_name, "client")
        self.assertEqual(spec.client_bandwidth, 4000)
        self.assertIsNone(spec.client_organization)
        self.assertEqual(spec.topology.rtt_inter_ms, 10.0)
        self.assertEqual(spec.chunk_size, 1000)

    def test_violated_equation_is_named(self):
        with self.assertRaises(ConstraintViolation) as ctx:
            load_config_text(SMALL_CLUSTER.replace("x: 3", "x: 4"))
        self.assertIn("Eq. 2", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(ConfigurationError):
            load_config("/nonexistent/cluster.yaml")

    def test_not_yaml(self):
        with self.assertRaises(ConfigurationError):
            load_config_text("cluster: [unclosed")

    def test_field_errors_name_the_field(self):
        with self.assertRaises(ConfigurationError) as ctx:
            load_config_text(SMALL_CLUSTER.replace("chunk_size: 1000", "chunk_size: 0"))
        self.assertIn("cluster.chunk_size", str(ctx.exception))

    def test_uneven_organizations_rejected(self):
        text = SMALL_CLUSTER.replace("      - {name: c2, bandwidth: 1500, capacity: 1000000}\n", "")
        with self.assertRaises(ConfigurationError) as ctx:
            load_config_text(text)
        self.assertIn("organizations", str(ctx.exception))

    def test_unknown_client_home(self):
        with self.assertRaises(ConfigurationError):
            load_config_text(SMALL_CLUSTER + "client: {organization: org-z}\n")


class ClusterCommandTestCase(TestCase):

    def setUp(self):
        self.tmp = tempfile.mkdtemp()
        self.addCleanup(shutil.rmtree, self.tmp, ignore_errors=True)
        override = override_settings(NODE_STORAGE_ROOT=str(Path(self.tmp) / "nodes"))
        override.enable()
        self.addCleanup(override.disable)
        self.config = Path(self.tmp) / "cluster.yaml"
        self.config.write_text(SMALL_CLUSTER)

    def call(self, *args, **kwargs):
        out, err = io.StringIO(), io.StringIO()
        call_command(*args, stdout=out, stderr=err, **kwargs)
        return out.getvalue()

    def assertExitCode(self, code, *args, **kwargs):
        with self.assertRaises(CommandError) as ctx:
            self.call(*args, **kwargs)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception

    def init(self):
        return self.call("init_cluster", str(self.config))

    def put(self, data: bytes, *flags, name="input.bin"):
        path = Path(self.tmp) / name
        path.write_bytes(data)
        return self.call("put_file", str(path), *flags).strip()

    def get(self, fid, *flags):
        out = Path(self.tmp) / "output.bin"
        self.call("get_file", fid, str(out), *flags)
        return out.read_bytes()


class InitClusterTests(ClusterCommandTestCase):

    def test_init_registers_nodes_and_masters(self):
        output = self.init()
        self.assertIn("org-c: master c2", output)
        self.assertEqual(StorageNode.objects.count(), 6)
        self.assertEqual(StorageNode.objects.get(name="a1").role, "master")
        self.assertEqual(StorageNode.objects.get(name="a2").role, "common")

    def test_second_init_needs_reset(self):
        self.init()
        self.assertExitCode(3, "init_cluster", str(self.config))
        self.call("init_cluster", str(self.config), "--reset")
        self.assertEqual(ClusterConfig.objects.count(), 1)

    def test_invalid_parameters_exit_code(self):
        self.config.write_text(SMALL_CLUSTER.replace("y: 1", "y: 2"))
        error = self.assertExitCode(4, "init_cluster", str(self.config))
        self.assertIn("Eq. 3", str(error))

    def test_missing_config(self):
        self.assertExitCode(3, "init_cluster", str(Path(self.tmp) / "absent.yaml"))

    def test_commands_before_init(self):
        self.assertExitCode(11, "show_tables")
        with self.assertRaises(NotInitialized):
            Cluster.load()


class FileCommandTests(ClusterCommandTestCase):

    def setUp(self):
        super().setUp()
        self.init()
        self.data = bytes(range(256)) * 40

    def test_put_get_round_trip(self):
        fid = self.put(self.data)
        self.assertEqual(len(fid), 64)
        self.assertEqual(self.get(fid), self.data)

    def test_chunks_land_on_disk(self):
        fid = self.put(self.data)
        cluster = Cluster.load()
        self.assertEqual(cluster.consortium.references(fid), 4 * 6)
        on_disk = sum(1 for p in (Path(self.tmp) / "nodes").rglob("*") if len(p.name) == 64)
        self.assertEqual(on_disk, sum(len(n.store) for n in cluster.nodes.values()))

    def test_banned_reader(self):
        fid = self.put(self.data, "--ban", "mallory")
        self.assertExitCode(6, "get_file", fid, str(Path(self.tmp) / "o"), "--as", "mallory")

    def test_unknown_fid(self):
        self.assertExitCode(5, "get_file", "0" * 64, str(Path(self.tmp) / "o"))

    def test_duplicate_put(self):
        self.put(self.data)
        path = Path(self.tmp) / "input.bin"
        self.assertExitCode(10, "put_file", str(path))

    def test_exclusions_below_spread(self):
        path = Path(self.tmp) / "input.bin"
        path.write_bytes(self.data)
        self.assertExitCode(8, "put_file", str(path), "--exclude", "org-a")

    def test_failures_persist_between_commands(self):
        fid = self.put(self.data)
        self.call("kill_org", "org-b")
        self.call("kill_node", "a2")
        self.assertFalse(StorageNode.objects.get(name="b1").alive)
        self.assertFalse(Cluster.load().nodes["a2"].alive)
        self.assertEqual(self.get(fid), self.data)

        self.call("revive_node", "org-b")
        self.call("revive_node", "a2")
        self.assertTrue(all(Cluster.load().consortium.network.is_alive(n) for n in ("a2", "b1", "b2")))

    def test_unknown_node(self):
        self.assertExitCode(3, "kill_node", "z9")

    def test_token_exhaustion_deletes_chunks(self):
        fid = self.put(self.data, "--permit", "bob", "--tokens", "2")
        self.assertEqual(self.get(fid, "--as", "bob"), self.data)
        self.assertEqual(self.get(fid, "--as", "bob"), self.data)
        self.assertExitCode(5, "get_file", fid, str(Path(self.tmp) / "o"), "--as", "bob")
        on_disk = [p for p in (Path(self.tmp) / "nodes").rglob("*") if len(p.name) == 64]
        self.assertEqual(on_disk, [])

    def test_trace_export(self):
        fid = self.put(self.data)
        trace = Path(self.tmp) / "trace.csv"
        self.get(fid, "--trace", str(trace))
        lines = trace.read_text().splitlines()
        self.assertEqual(lines[0], "time_ms,event,src,dst,bytes")
        self.assertGreater(len(lines), 1)

    def test_show_tables(self):
        self.put(self.data)
        output = self.call("show_tables", "--stats")
        self.assertIn("Slot tables v1", output)
        self.assertIn("c2", output)
        self.assertIn("files: 1", output)
        canonical = self.call("show_tables", "--canonical")
        self.assertTrue(canonical.startswith("table inter"))


class ExperimentTests(TestCase):

    def test_links_csv_shape_and_determinism(self):
        frame = bench_links(max_chunks=60, step=30, trials=2, seed=1, chunk_bytes=200)
        self.assertEqual(list(frame.columns), LINK_COLUMNS)
        self.assertEqual(list(frame["chunks"]), [0, 30, 60])
        self.assertEqual(frame.iloc[0]["total_links"], 0)
        self.assertTrue(frame["total_links"].is_monotonic_increasing)
        for _, row in frame.iterrows():
            self.assertLessEqual(row["total_links"] * 128, row["link_bytes"])
            self.assertLessEqual(row["link_bytes"], 2 * row["total_links"] * 128)
        again = bench_links(max_chunks=60, step=30, trials=2, seed=1, chunk_bytes=200)
        self.assertEqual(to_csv(frame), to_csv(again))

    @tag("slow")
    def test_thousand_chunks_on_three_organizations(self):
        frame = bench_links(max_chunks=1000, step=1000, trials=3, seed=7, chunk_bytes=100)
        last = frame.iloc[-1]
        self.assertTrue(50 <= last["max_links_per_node"] <= 150, last["max_links_per_node"])
        self.assertTrue(150 <= last["total_links"] <= 450, last["total_links"])

    @tag("slow")
    def test_five_hundred_megabyte_write_link_bytes(self):
        data = np.random.default_rng(500).bytes(500 * MB)
        with scratch_consortium(reference_spec(MB, seed=7)) as consortium:
            receipt = write_file(consortium, "bench", data)
            stats = consortium.link_stats()
        self.assertEqual(receipt.link_bytes, receipt.link_copies * LINK_RECORD_BYTES)
        self.assertEqual(stats["link_bytes"], receipt.link_bytes)
        self.assertLessEqual(receipt.link_bytes, 76_800)
        self.assertLessEqual(receipt.links * LINK_RECORD_BYTES / len(data), 1e-4)

    def test_negative_seed_rejected(self):
        with self.assertRaises(ConfigurationError):
            bench_links(max_chunks=6, step=6, trials=1, seed=-1)

    def test_latency_rows(self):
        frame = bench_latency("uniform", sizes_mb=[1], trials=2, seed=5, chunk_size=100_000)
        self.assertEqual(list(frame.columns), LATENCY_COLUMNS)
        self.assertEqual(len(frame), 4)
        means = {(r.system, r.op): r.mean_latency_ms for r in frame.itertuples()}
        self.assertEqual(means["baseline", "write"], 0.0)
        self.assertGreater(means["dbnode", "write"], means["baseline", "write"])
        # 8 Mbit at 1,000 Mbps plus one 10 ms round trip
        self.assertAlmostEqual(means["baseline", "read"], 18.0)

    def test_stepped_baseline_follows_holder_bandwidth(self):
        frame = bench_latency("stepped", sizes_mb=[1], trials=4, seed=5, chunk_size=100_000)
        means = {(r.system, r.op): r.mean_latency_ms for r in frame.itertuples()}
        # one trial per organization: 400, 800, 1,200 and 1,600 Mbps holders
        expected = (30.0 + 20.0 + (10 + 8000 / 1200) + 15.0) / 4
        self.assertAlmostEqual(means["baseline", "read"], expected)

    def test_latency_csv_is_reproducible(self):
        first = to_csv(bench_latency("uniform", sizes_mb=[0.2], trials=2, seed=9, chunk_size=20_000))
        second = to_csv(bench_latency("uniform", sizes_mb=[0.2], trials=2, seed=9, chunk_size=20_000))
        self.assertEqual(first, second)
        self.assertTrue(first.startswith("size_mb,system,op,mean_latency_ms\n"))

    def test_unknown_mode(self):
        with self.assertRaises(ConfigurationError):
            bench_latency("diagonal", sizes_mb=[1], trials=1)


@tag("slow")
class LatencyTrendTests(TestCase):
    """Four trials per size over the benchmark sizes, one holder per organization for the baseline."""

    @classmethod
    def setUpTestData(cls):
        cls.sizes = list(settings.DBNODE["BENCH_SIZES_MB"])
        cls.means = {}
        for mode in ("uniform", "stepped"):
            frame = bench_latency(mode, sizes_mb=cls.sizes, trials=4, seed=7)
            for row in frame.itertuples():
                cls.means[mode, row.size_mb, row.system, row.op] = row.mean_latency_ms

    def test_stepped_bandwidth_barely_moves_coded_reads(self):
        for size in self.sizes:
            uniform = self.means["uniform", size, "dbnode", "read"]
            stepped = self.means["stepped", size, "dbnode", "read"]
            self.assertLess(abs(stepped - uniform) / uniform, 0.10, size)

    def test_stepped_bandwidth_slows_the_baseline(self):
        uniform = self.means["uniform", 300, "baseline", "read"]
        stepped = self.means["stepped", 300, "baseline", "read"]
        self.assertGreater(stepped, uniform * 1.2)

    def test_coded_write_costs_more_than_local_write(self):
        for mode in ("uniform", "stepped"):
            for size in self.sizes:
                self.assertGreater(self.means[mode, size, "dbnode", "write"],
                                   self.means[mode, size, "baseline", "write"], (mode, size))

    def test_coded_read_beats_single_holder_on_large_files(self):
        for size in (100, 200, 300):
            self.assertLess(self.means["uniform", size, "dbnode", "read"],
                            self.means["uniform", size, "baseline", "read"], size)


class ExperimentTaskTests(TestCase):

    def test_links_task_stores_csv(self):
        run = ExperimentRun.objects.create(
            kind=ExperimentRun.Kind.LINKS, trials=1,
            parameters={"max_chunks": 12, "step": 6, "seed": 2, "chunk_bytes": 100})
        run_bench_links_task(run.pk)
        run.refresh_from_db()
        self.assertEqual(run.status, ExperimentRun.Status.FINISHED)
        self.assertTrue(run.csv.startswith("chunks,max_links_per_node,total_links,link_bytes\n"))
        self.assertIsNotNone(run.finished_at)

    def test_failed_task_is_recorded(self):
        run = ExperimentRun.objects.create(
            kind=ExperimentRun.Kind.LINKS, trials=1,
            parameters={"max_chunks": 12, "step": 0, "seed": 2, "chunk_bytes": 100})
        with self.assertRaises(ConfigurationError):
            run_bench_links_task(run.pk)
        run.refresh_from_db()
        self.assertEqual(run.status, ExperimentRun.Status.FAILED)
        self.assertIn("step", run.error)


class BenchCommandTests(ClusterCommandTestCase):

    def test_bench_links_stdout(self):
        output = self.call("bench_links", "--max-chunks", "12", "--step", "6", "--trials", "1",
                           "--chunk-bytes", "100")
        lines = output.splitlines()
        self.assertEqual(lines[0], ",".join(LINK_COLUMNS))
        self.assertEqual(len(lines), 4)
        self.assertEqual(ExperimentRun.objects.get().status, ExperimentRun.Status.FINISHED)

    def test_bench_links_with_config(self):
        output = self.call("bench_links", "--config", str(self.config), "--max-chunks", "6",
                           "--step", "6", "--trials", "1", "--chunk-bytes", "100")
        self.assertEqual(len(output.splitlines()), 3)

    def test_bench_latency_to_file(self):
        out = Path(self.tmp) / "latency.csv"
        self.call("bench_latency", "--uniform", "--sizes", "0.05", "--trials", "1",
                  "--chunk-size", "10000", "--out", str(out))
        lines = out.read_text().splitlines()
        self.assertEqual(lines[0], ",".join(LATENCY_COLUMNS))
        self.assertEqual(len(lines), 5)
        self.assertEqual(ExperimentRun.objects.get().parameters["sizes_mb"], [0.05])

    def test_bench_latency_enqueue(self):
        output = self.call("bench_latency", "--stepped", "--sizes", "0.05", "--trials", "1",
                           "--chunk-size", "10000", "--enqueue")
        self.assertIn("queued", output)

    def test_bench_latency_needs_a_mode(self):
        with self.assertRaises(CommandError):
            self.call("bench_latency", "--sizes", "1")
