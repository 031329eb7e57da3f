import os
import tempfile

import pandas as pd
from django.test import SimpleTestCase

from apps.core.constants import MB
from apps.core.exceptions import ConfigurationError, TransferFailed

from .network import TRACE_COLUMNS, Network
from .topology import ClusterTopology


def two_org_network(rtt_intra=1.0, rtt_inter=1.0, bandwidth=1000):
    topology = ClusterTopology(
        organizations={"org-a": ("a1", "a2"), "org-b": ("b1", "b2")},
        bandwidth={n: bandwidth for n in ("a1", "a2", "b1", "b2")},
        rtt_intra_ms=rtt_intra,
        rtt_inter_ms=rtt_inter,
    )
    return Network(topology)


class TopologyTests(SimpleTestCase):

    def test_node_in_two_orgs_rejected(self):
        with self.assertRaises(ConfigurationError):
            ClusterTopology({"a": ("n1",), "b": ("n1",)}, {"n1": 10})

    def test_zero_bandwidth_rejected(self):
        with self.assertRaises(ConfigurationError):
            ClusterTopology({"a": ("n1",)}, {"n1": 0})

    def test_counts(self):
        topology = ClusterTopology({"a": ("n1", "n2"), "b": ("n3", "n4")},
                                   {f"n{i}": 1 for i in range(1, 5)})
        self.assertEqual((topology.N, topology.M), (4, 2))
        self.assertEqual(topology.org_of("n3"), "b")


class TransferTests(SimpleTestCase):

    def test_empty_schedule(self):
        net = two_org_network()
        self.assertEqual(net.now(), 0)
        self.assertEqual(net.run_until_idle(), 0)

    def test_dedicated_path(self):
        """1 MB at 1,000 Mbps with a 1 ms round trip takes 9 ms."""
        net = two_org_network()
        handle = net.transfer("a1", "a2", MB)
        self.assertAlmostEqual(net.run_until_idle(), 9.0)
        self.assertAlmostEqual(handle.completed_at, 9.0)

    def test_shared_receiver_halves_rate(self):
        net = two_org_network()
        net.add_endpoint("client", 1000)
        first = net.transfer("a1", "client", MB)
        second = net.transfer("b1", "client", MB)
        net.run_until_idle()
        self.assertAlmostEqual(first.completed_at, 17.0)
        self.assertAlmostEqual(second.completed_at, 17.0)

    def test_intra_and_inter_round_trips(self):
        net = two_org_network(rtt_intra=1.0, rtt_inter=10.0)
        inside = net.transfer("a1", "a2", 0)
        across = net.transfer("a1", "b1", 0)
        self.assertAlmostEqual(net.run_until_idle(), 10.0)
        self.assertAlmostEqual(inside.completed_at, 1.0)
        self.assertAlmostEqual(across.completed_at, 10.0)

    def test_independent_transfers_idle_at_latest(self):
        net = two_org_network()
        net.transfer("a1", "a2", MB)
        net.transfer("b1", "b2", 2 * MB)
        self.assertAlmostEqual(net.run_until_idle(), 17.0)

    def test_rates_recover_when_a_flow_ends(self):
        """A 1 MB and a 2 MB flow share a sender: 16 ms shared, then 8 ms alone."""
        net = two_org_network()
        short = net.transfer("a1", "a2", MB)
        long = net.transfer("a1", "b1", 2 * MB)
        net.run_until_idle()
        self.assertAlmostEqual(short.completed_at, 17.0)
        self.assertAlmostEqual(long.completed_at, 25.0)

    def test_load_never_speeds_a_transfer_up(self):
        alone = two_org_network()
        solo = alone.transfer("a1", "b1", MB)
        alone.run_until_idle()
        busy = two_org_network()
        loaded = busy.transfer("a1", "b1", MB)
        busy.transfer("a2", "b1", MB)
        busy.run_until_idle()
        self.assertGreaterEqual(loaded.completed_at, solo.completed_at)

    def test_start_time_defers(self):
        net = two_org_network()
        handle = net.transfer("a1", "a2", MB, start_time=5.0)
        net.run_until_idle()
        self.assertAlmostEqual(handle.completed_at, 14.0)

    def test_cancel_frees_bandwidth(self):
        net = two_org_network()
        net.add_endpoint("client", 1000)
        keep = net.transfer("a1", "client", MB)
        drop = net.transfer("b1", "client", MB)

        def canceller(env):
            yield env.timeout(5.0)
            drop.cancel()

        net.env.process(canceller(net.env))
        net.run_until_idle()
        # 4 ms at half rate moves 2 Mbit, the remaining 6 Mbit take 6 ms
        self.assertAlmostEqual(keep.completed_at, 11.0)
        self.assertTrue(drop.cancelled)
        self.assertIsNone(drop.completed_at)


class FailureTests(SimpleTestCase):

    def test_transfer_to_dead_node_fails(self):
        net = two_org_network()
        net.kill_node("a2")
        handle = net.transfer("a1", "a2", MB)
        net.run_until_idle()
        self.assertTrue(handle.failed)
        self.assertFalse(handle.done.ok)
        self.assertIsInstance(handle.done.value, TransferFailed)

    def test_kill_mid_transfer_fails_at_that_instant(self):
        net = two_org_network()
        handle = net.transfer("a1", "b1", MB)
        outcome = {}

        def waiter(env):
            try:
                yield handle.done
            except TransferFailed:
                outcome["failed_at"] = env.now

        def killer(env):
            yield env.timeout(4.0)
            net.kill_org("org-b")

        net.env.process(waiter(net.env))
        net.env.process(killer(net.env))
        net.run_until_idle()
        self.assertEqual(outcome["failed_at"], 4.0)

    def test_revive_restores_service(self):
        net = two_org_network()
        net.kill_org("org-a")
        self.assertFalse(net.is_alive("a1"))
        net.revive("org-a")
        handle = net.transfer("a1", "a2", MB)
        net.run_until_idle()
        self.assertIsNotNone(handle.completed_at)


class TraceTests(SimpleTestCase):

    def _run(self):
        net = two_org_network()
        net.add_endpoint("client", 1000)
        net.transfer("a1", "client", MB)
        net.transfer("b1", "client", 3 * MB)
        net.kill_node("b2")
        net.transfer("b2", "client", MB)
        net.run_until_idle()
        return net

    def test_trace_is_deterministic(self):
        self.assertEqual(self._run().trace, self._run().trace)

    def test_trace_export(self):
        net = self._run()
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "trace.csv")
            net.export_trace(path)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), TRACE_COLUMNS)
        self.assertEqual(sorted(set(frame["event"])), ["fail", "finish", "start"])
