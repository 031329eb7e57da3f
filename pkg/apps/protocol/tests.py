import itertools
import random

from django.test import TestCase

from apps.core.constants import MB
from apps.core.digests import digest
from apps.core.exceptions import (
    DuplicateFile,
    FileNotFound,
    PermissionDenied,
    PlacementImpossible,
    TransferFailed,
    UnrecoverableStripe,
    WriteFailed,
)
from apps.erasure.params import CodeParams
from apps.erasure.stripes import encode_file
from apps.ledger.contract import FileChannelContract
from apps.ledger.records import AccessPolicy
from apps.nodes import messages as msg
from apps.simnet.topology import ClusterTopology

from .baseline import BaselineStore, stratified_holder
from .client import read_file, write_file
from .consortium import Consortium, elect_master

REFERENCE = CodeParams(N=6, M=3, x=3, y=1, n=6, k=3, l=3)
EVAL = CodeParams(N=12, M=4, x=3, y=1, n=6, k=3, l=3)
CHUNK = 1000


def build(orgs=3, per_org=2, params=REFERENCE, bandwidths=None, chunk_size=CHUNK, channel="test"):
    organizations = {f"org-{o}": tuple(f"org-{o}-n{j}" for j in range(1, per_org + 1))
                     for o in range(1, orgs + 1)}
    bandwidth = {}
    for o, (org, nodes) in enumerate(sorted(organizations.items())):
        for node in nodes:
            bandwidth[node] = bandwidths[o] if bandwidths else 1000
    topology = ClusterTopology(organizations, bandwidth, rtt_intra_ms=1.0, rtt_inter_ms=10.0)
    consortium = Consortium(topology, params, chunk_size, FileChannelContract(channel))
    consortium.publish()
    return consortium


def payload(seed, size):
    return random.Random(seed).randbytes(size)


class ConsortiumTests(TestCase):

    def test_master_election_and_roles(self):
        self.assertEqual(elect_master(["b", "a"], {"a": 10, "b": 10}), "a")
        self.assertEqual(elect_master(["b", "a"], {"a": 10, "b": 20}), "b")
        consortium = build()
        self.assertEqual(consortium.masters, {"org-1": "org-1-n1", "org-2": "org-2-n1",
                                              "org-3": "org-3-n1"})
        self.assertTrue(consortium.nodes["org-1-n1"].is_master)
        self.assertFalse(consortium.nodes["org-1-n2"].is_master)

    def test_inter_table_follows_master_bandwidth(self):
        consortium = build(orgs=4, per_org=3, params=EVAL, bandwidths=[400, 800, 1200, 1600])
        self.assertEqual(list(consortium.tables.inter.counts), [1638, 3277, 4915, 6554])


class WriteReadTests(TestCase):

    def setUp(self):
        self.consortium = build()

    def test_stripe_arithmetic(self):
        receipt = write_file(self.consortium, "alice", payload(1, 10 * CHUNK))
        self.assertEqual(receipt.stripes, 4)
        self.assertEqual(receipt.chunks, 24)
        self.assertGreater(receipt.latency_ms, 0)
        self.assertTrue(self.consortium.ledger.has_file(receipt.fid))

    def test_round_trip(self):
        data = payload(2, 7 * CHUNK + 123)
        receipt = write_file(self.consortium, "alice", data)
        result = read_file(self.consortium, "alice", receipt.fid)
        self.assertEqual(result.data, data)
        self.assertGreater(result.latency_ms, 0)

    def test_every_length_round_trips(self):
        for size in (0, 1, CHUNK - 1, CHUNK, 3 * CHUNK, 3 * CHUNK + 1, 9 * CHUNK - 7):
            data = payload(size, size)
            receipt = write_file(self.consortium, f"owner-{size}", data)
            self.assertEqual(read_file(self.consortium, f"owner-{size}", receipt.fid).data, data)

    def test_empty_file(self):
        receipt = write_file(self.consortium, "alice", b"")
        self.assertEqual((receipt.stripes, receipt.chunks), (0, 0))
        self.assertEqual(read_file(self.consortium, "bob", receipt.fid).data, b"")

    def test_conservation(self):
        receipt = write_file(self.consortium, "alice", payload(3, 12 * CHUNK))
        self.assertEqual(self.consortium.references(receipt.fid), receipt.stripes * 6)

    def test_duplicate_rejected(self):
        data = payload(4, 5 * CHUNK)
        write_file(self.consortium, "alice", data)
        with self.assertRaises(DuplicateFile):
            write_file(self.consortium, "bob", data)

    def test_banned_reader_sends_no_chunk_requests(self):
        receipt = write_file(self.consortium, "alice", payload(5, 4 * CHUNK),
                             AccessPolicy(banned_list={"mallory"}))
        before = len(self.consortium.network.trace)
        with self.assertRaises(PermissionDenied):
            read_file(self.consortium, "mallory", receipt.fid)
        self.assertEqual(len(self.consortium.network.trace), before)

    def test_unknown_file(self):
        with self.assertRaises(FileNotFound):
            read_file(self.consortium, "bob", digest(b"nothing"))

    def test_sequential_mode_is_not_faster(self):
        data = payload(6, 12 * CHUNK)
        receipt = write_file(self.consortium, "alice", data, sequential=True)
        slow = read_file(self.consortium, "alice", receipt.fid, sequential=True)
        fast = read_file(self.consortium, "alice", receipt.fid)
        self.assertEqual(slow.data, fast.data)
        self.assertGreaterEqual(slow.latency_ms, fast.latency_ms)

    def test_placement_is_deterministic(self):
        data = payload(7, 9 * CHUNK)
        other = build(channel="test-2")
        write_file(self.consortium, "alice", data)
        write_file(other, "alice", data)
        layout = {n: sorted(node.chunk_owners) for n, node in self.consortium.nodes.items()}
        self.assertEqual(layout, {n: sorted(node.chunk_owners) for n, node in other.nodes.items()})


class FailureToleranceTests(TestCase):

    def test_any_three_nodes_or_one_org_may_fail(self):
        consortium = build()
        files = {}
        for i in range(10):
            data = payload(100 + i, (i + 1) * CHUNK + i)
            files[write_file(consortium, f"user-{i}", data).fid] = (f"user-{i}", data)

        nodes = sorted(consortium.nodes)
        kill_sets = [list(c) for c in itertools.combinations(nodes, 3)]
        self.assertEqual(len(kill_sets), 20)
        kill_sets += [list(consortium.topology.organizations[o]) for o in consortium.topology.organizations]

        for dead in kill_sets:
            for node in dead:
                consortium.kill_node(node)
            for fid, (owner, data) in files.items():
                self.assertEqual(read_file(consortium, owner, fid).data, data, dead)
            for node in dead:
                consortium.revive(node)

    def test_four_dead_nodes_lose_data(self):
        consortium = build()
        receipt = write_file(consortium, "alice", payload(8, 3 * CHUNK))
        by_load = sorted(consortium.nodes, key=lambda n: (consortium.nodes[n].chunk_references(receipt.fid), n))
        for node in by_load[2:]:
            consortium.kill_node(node)
        with self.assertRaises(UnrecoverableStripe):
            read_file(consortium, "alice", receipt.fid)

    def test_slowest_holders_killed(self):
        consortium = build(orgs=3, per_org=2, bandwidths=[400, 800, 1600])
        data = payload(9, 9 * CHUNK)
        receipt = write_file(consortium, "alice", data)
        slow = sorted(consortium.nodes, key=lambda n: (consortium.nodes[n].bandwidth, n))[:3]
        for node in slow:
            consortium.kill_node(node)
        self.assertEqual(read_file(consortium, "alice", receipt.fid).data, data)

    def test_write_avoids_dead_node_when_room_remains(self):
        consortium = build(orgs=4, per_org=3, params=EVAL)
        consortium.kill_node("org-2-n3")
        data = payload(10, 6 * CHUNK)
        receipt = write_file(consortium, "alice", data)
        self.assertEqual(consortium.nodes["org-2-n3"].chunk_references(receipt.fid), 0)
        self.assertEqual(read_file(consortium, "alice", receipt.fid).data, data)

    def test_write_to_dead_master_rolls_back(self):
        consortium = build(orgs=4, per_org=3, params=EVAL)
        consortium.kill_node("org-1-n1")
        data = payload(11, 30 * CHUNK)
        with self.assertRaises(WriteFailed):
            write_file(consortium, "alice", data)
        for node in consortium.nodes.values():
            self.assertEqual(node.chunk_owners, {})
            self.assertEqual(node.links, {})
            self.assertEqual(node.table.links, {})
        self.assertEqual(consortium.ledger.file_ids(), [])


class ExclusionTests(TestCase):

    def test_excluded_org_keeps_links_only(self):
        consortium = build(orgs=4, per_org=3, params=EVAL)
        data = payload(12, 30 * CHUNK)
        receipt = write_file(consortium, "alice", data, exclusions={"org-2"})
        excluded = consortium.members("org-2")
        self.assertEqual(sum(n.chunk_references(receipt.fid) for n in excluded), 0)
        self.assertGreater(sum(n.references(receipt.fid) for n in excluded), 0)
        self.assertEqual(read_file(consortium, "alice", receipt.fid).data, data)

    def test_too_many_exclusions(self):
        consortium = build(orgs=4, per_org=3, params=EVAL)
        with self.assertRaises(PlacementImpossible):
            write_file(consortium, "alice", payload(13, 3 * CHUNK), exclusions={"org-1", "org-2"})
        self.assertEqual(sum(len(n.chunk_owners) for n in consortium.nodes.values()), 0)


class TokenLifecycleTests(TestCase):

    def test_three_tokens(self):
        consortium = build()
        data = payload(14, 8 * CHUNK)
        receipt = write_file(consortium, "alice", data,
                             AccessPolicy(permission_list={"bob"}, tokens=3))
        for attempt in range(3):
            result = read_file(consortium, "bob", receipt.fid)
            self.assertEqual(result.data, data)
            self.assertEqual(result.purged, attempt == 2)
        with self.assertRaises(FileNotFound):
            read_file(consortium, "bob", receipt.fid)

        chunk_hashes = [h for s in encode_file(data, REFERENCE, CHUNK)[0] for h in s.chunk_hashes]
        for node in consortium.nodes.values():
            self.assertEqual(node.references(receipt.fid), 0)
            self.assertEqual(node.links, {})
            self.assertEqual(node.table.links, {})
            for h in chunk_hashes:
                self.assertEqual(node.fetch_chunk(h).kind, msg.NOT_FOUND)

    def test_failed_final_read_still_purges(self):
        consortium = build()
        data = payload(17, 3 * CHUNK)
        receipt = write_file(consortium, "alice", data,
                             AccessPolicy(permission_list={"bob"}, tokens=1))
        dead = sorted(consortium.nodes)[:4]
        for node in dead:
            consortium.kill_node(node)
        with self.assertLogs("apps", level="WARNING") as logs:
            with self.assertRaises(UnrecoverableStripe):
                read_file(consortium, "bob", receipt.fid)
        self.assertTrue(any("unrecoverable" in line for line in logs.output))
        for node in dead:
            consortium.revive(node)

        self.assertFalse(consortium.ledger.has_file(receipt.fid))
        chunk_hashes = encode_file(data, REFERENCE, CHUNK)[0][0].chunk_hashes
        for node in consortium.nodes.values():
            self.assertEqual(node.references(receipt.fid), 0)
            for h in chunk_hashes:
                self.assertEqual(node.fetch_chunk(h).kind, msg.NOT_FOUND)
        with self.assertRaises(FileNotFound):
            read_file(consortium, "bob", receipt.fid)


class LatencyTests(TestCase):

    def test_first_k_chunks_decide_stripe_latency(self):
        """A crawling node holding one chunk does not hold the read back."""
        consortium = build(chunk_size=50_000)
        receipt = write_file(consortium, "alice", payload(15, 150_000))
        healthy = read_file(consortium, "alice", receipt.fid).latency_ms
        consortium.network.endpoints["org-3-n2"].bandwidth = 1
        slowed = read_file(consortium, "alice", receipt.fid).latency_ms
        self.assertLess(slowed, healthy * 3)

    def test_write_costs_more_than_local_baseline(self):
        consortium = build()
        receipt = write_file(consortium, "alice", payload(16, 6 * CHUNK))
        _, baseline_latency = BaselineStore(consortium).write("org-1-n1", payload(16, 6 * CHUNK))
        self.assertEqual(baseline_latency, 0.0)
        self.assertGreater(receipt.latency_ms, baseline_latency)


class BaselineTests(TestCase):

    def test_closed_form_read(self):
        """10 MB from one 1,000 Mbps holder with a 10 ms round trip: 80 + 10 ms."""
        consortium = build()
        store = BaselineStore(consortium)
        data = bytes(10 * MB)
        fid, _ = store.write("org-1-n1", data)
        read, latency = store.read(fid)
        self.assertEqual(len(read), len(data))
        self.assertAlmostEqual(latency, 90.0)

    def test_dead_holder_fails(self):
        consortium = build()
        store = BaselineStore(consortium)
        fid, _ = store.write("org-2-n1", b"x" * 100)
        consortium.kill_node("org-2-n1")
        with self.assertRaises(TransferFailed):
            store.read(fid)

    def test_stratified_holder_cycles_orgs(self):
        consortium = build(orgs=4, per_org=3, params=EVAL)
        holders = [stratified_holder(consortium.topology, t, seed=7) for t in range(20)]
        orgs = [consortium.topology.org_of(h) for h in holders]
        self.assertEqual(orgs[:4], ["org-1", "org-2", "org-3", "org-4"])
        self.assertEqual(orgs.count("org-1"), 5)
        self.assertEqual(holders, [stratified_holder(consortium.topology, t, seed=7) for t in range(20)])
