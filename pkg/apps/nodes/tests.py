import hashlib
import random
import tempfile

from django.test import SimpleTestCase, override_settings

from apps.core.digests import digest
from apps.core.exceptions import CapacityExceeded, DigestMismatch, TransferFailed, WriteFailed
from apps.erasure.params import CodeParams
from apps.hashslot.tables import SlotTables
from apps.placement.links import LinkRecord
from apps.placement.planner import plan_stripe, resolve
from apps.placement.state import PlacementState

from . import messages as msg
from .distribution import master_distribute, purge_everywhere
from .node import DBNode, NodeRole
from .stores import DirectoryChunkStore

REFERENCE = CodeParams(N=6, M=3, x=3, y=1, n=6, k=3, l=3)


def chunk(label, size=32):
    data = hashlib.sha512(label.encode()).digest()[:size]
    return digest(data), data


class DBNodeTests(SimpleTestCase):

    def setUp(self):
        self.node = DBNode("p1", "org-a", capacity=100, bandwidth=1000)

    def test_store_and_fetch(self):
        h, data = chunk("x")
        ack = self.node.handle(msg.StoreChunk(h, data, "f1"))
        self.assertTrue(ack.stored)
        reply = self.node.handle(msg.FetchChunk(h))
        self.assertTrue(reply.ok)
        self.assertEqual(reply.data, data)
        self.assertEqual(self.node.stored_bytes, 32)

    def test_corrupted_payload_rejected(self):
        h, _ = chunk("x")
        with self.assertRaises(DigestMismatch):
            self.node.store_chunk(h, b"tampered")

    def test_capacity_enforced(self):
        for i in range(3):
            self.node.store_chunk(*chunk(f"c{i}"))
        with self.assertRaises(CapacityExceeded):
            self.node.store_chunk(*chunk("c3"))

    def test_redirect_from_link(self):
        h, _ = chunk("y")
        self.node.store_link(LinkRecord(h, "p2"))
        reply = self.node.fetch_chunk(h)
        self.assertEqual(reply.kind, msg.REDIRECT)
        self.assertEqual(reply.holder, "p2")

    def test_delete_is_idempotent(self):
        h, data = chunk("z")
        self.node.store_chunk(h, data, "f1")
        self.assertEqual(self.node.delete_chunk(h).freed, 32)
        self.assertEqual(self.node.delete_chunk(h).freed, 0)
        self.assertEqual(self.node.fetch_chunk(h).kind, msg.NOT_FOUND)
        self.assertEqual(self.node.stored_bytes, 0)

    def test_link_and_chunk_never_coexist(self):
        h, data = chunk("w")
        self.node.store_link(LinkRecord(h, "p2"), "f1")
        self.node.store_chunk(h, data, "f2")
        self.assertIsNone(self.node.get_link(h))
        self.assertFalse(self.node.store_link(LinkRecord(h, "p3"), "f3"))
        self.assertIsNone(self.node.get_link(h))

    def test_shared_chunk_survives_until_last_owner(self):
        h, data = chunk("shared")
        self.node.store_chunk(h, data, "f1")
        self.node.store_chunk(h, data, "f2")
        self.node.purge_file("f1")
        self.assertTrue(self.node.has_chunk(h))
        self.node.purge_file("f2")
        self.assertFalse(self.node.has_chunk(h))

    def test_dead_node_fails_requests(self):
        self.node.alive = False
        with self.assertRaises(TransferFailed):
            self.node.fetch_chunk(chunk("a")[0])

    def test_state_round_trip(self):
        h, data = chunk("s")
        self.node.store_chunk(h, data, "f1")
        other, _ = chunk("t")
        self.node.store_link(LinkRecord(other, "p2", 4), "f1")
        clone = DBNode("p1", "org-a", 100, 1000, store=self.node.store)
        clone.load_state(self.node.to_state())
        self.assertEqual(clone.references("f1"), 2)
        self.assertEqual(clone.get_link(other).created_at, 4)


class DirectoryChunkStoreTests(SimpleTestCase):

    def test_chunks_persist_as_files(self):
        with tempfile.TemporaryDirectory() as root:
            with override_settings(NODE_STORAGE_ROOT=root):
                store = DirectoryChunkStore("p1")
                h, data = chunk("disk")
                store.put(h, data)
                reopened = DirectoryChunkStore("p1")
                self.assertIn(h, reopened)
                self.assertEqual(reopened.get(h), data)
                reopened.delete(h)
                self.assertNotIn(h, DirectoryChunkStore("p1"))


class MasterDistributeTests(SimpleTestCase):

    def setUp(self):
        self.tables = SlotTables.build(
            {"org-a": 1, "org-b": 1, "org-c": 1},
            {o: {f"{o[-1]}1": 1, f"{o[-1]}2": 1} for o in ("org-a", "org-b", "org-c")},
        )
        self.nodes = {}
        for org in self.tables.organizations:
            for i, node in enumerate(self.tables.nodes_of(org)):
                role = NodeRole.MASTER if i == 0 else NodeRole.COMMON
                self.nodes[node] = DBNode(node, org, capacity=10**6, bandwidth=1000, role=role)
        for node in self.nodes.values():
            node.peers = {n: peer for n, peer in self.nodes.items()
                          if peer.organization == node.organization}
        self.masters = {"org-a": "a1", "org-b": "b1", "org-c": "c1"}

    def _stripe(self, rng):
        payloads = {}
        for _ in range(6):
            data = rng.randbytes(64)
            payloads[digest(data)] = data
        return payloads

    def _distribute(self, plan, payloads, owner):
        return [self.nodes[m].handle(msg.Distribute(plan, payloads, owner, org))
                for org, m in self.masters.items()]

    def test_stripe_lands_on_planned_holders(self):
        rng = random.Random(1)
        state = PlacementState()
        total_links = 0
        for s in range(20):
            payloads = self._stripe(rng)
            plan = plan_stripe(list(payloads), self.tables, REFERENCE, state=state)
            reports = self._distribute(plan, payloads, f"f{s}")
            total_links += len(plan.links)
            for entry in plan.entries:
                self.assertTrue(self.nodes[entry.holder].has_chunk(entry.chunk_hash))
            for link in plan.links:
                entry = next(e for e in plan.entries if e.chunk_hash == link.chunk_hash)
                master = self.nodes[self.masters[entry.designated_org]]
                self.assertEqual(master.table.links[link.chunk_hash].holder, entry.holder)
                designation = (entry.designated_org, entry.designated_node)
                self.assertEqual(resolve(link.chunk_hash, self.tables, self.nodes, self.masters,
                                         designation), entry.holder)
                self.assertEqual(self.nodes[entry.designated_node].fetch_chunk(link.chunk_hash).holder,
                                 entry.holder)
            self.assertEqual(sum(len(r.acks) for r in reports), 6)
        refs = sum(n.chunk_references(f"f{s}") for n in self.nodes.values() for s in range(20))
        self.assertEqual(refs, 20 * 6)

    def test_pending_mirrors_tracked_by_master(self):
        rng = random.Random(2)
        state = PlacementState()
        for s in range(30):
            payloads = self._stripe(rng)
            plan = plan_stripe(list(payloads), self.tables, REFERENCE, state=state)
            self._distribute(plan, payloads, f"f{s}")
        tracked = sorted((b, a) for m in self.masters.values()
                         for b, partners in self.nodes[m].table.pending.items() for a in partners)
        self.assertEqual(tracked, state.pending_pairs())

    def test_failed_store_rolls_back_the_organization(self):
        rng = random.Random(3)
        payloads = self._stripe(rng)
        plan = plan_stripe(list(payloads), self.tables, REFERENCE)
        victim = next(e for e in plan.entries if e.holder_org == "org-b")
        other = next(e for e in plan.entries if e.holder_org == "org-b" and e is not victim)
        self.nodes[other.holder].alive = False
        with self.assertRaises(WriteFailed):
            master_distribute(self.nodes["b1"], plan, payloads, "f1", self.nodes)
        self.assertEqual(self.nodes["b1"].chunk_references("f1") + self.nodes["b2"].chunk_references("f1"), 0)

    def test_purge_removes_chunks_and_links(self):
        rng = random.Random(4)
        state = PlacementState()
        for s in range(10):
            payloads = self._stripe(rng)
            self._distribute(plan_stripe(list(payloads), self.tables, REFERENCE, state=state), payloads, "f1")
        purge_everywhere("f1", self.nodes, self.masters)
        for node in self.nodes.values():
            self.assertEqual(node.references("f1"), 0)
            self.assertEqual(node.stored_bytes, 0)
            self.assertEqual(node.links, {})
            self.assertEqual(node.table.links, {})
            self.assertEqual(node.table.holders, {})

    def test_distribute_reports_wire_size_of_the_organization_share(self):
        payloads = self._stripe(random.Random(5))
        plan = plan_stripe(list(payloads), self.tables, REFERENCE)
        message = msg.Distribute(plan, payloads, "f1", "org-c")
        self.assertEqual(message.wire_size, 64 * plan.org_counts()["org-c"])
        report = self.nodes["c1"].handle(message)
        self.assertEqual(len(report.acks), plan.org_counts()["org-c"])

    def test_only_the_master_accepts_distribute(self):
        payloads = self._stripe(random.Random(6))
        plan = plan_stripe(list(payloads), self.tables, REFERENCE)
        with self.assertRaises(WriteFailed):
            self.nodes["a2"].handle(msg.Distribute(plan, payloads, "f1", "org-a"))
        self.assertEqual(self.nodes["a1"].chunk_references("f1")
                         + self.nodes["a2"].chunk_references("f1"), 0)


class MasterDirectoryTests(SimpleTestCase):

    def setUp(self):
        self.master = DBNode("m1", "org-a", capacity=100, bandwidth=1000, role=NodeRole.MASTER)

    def test_master_keeps_directory_link_for_its_own_chunk(self):
        h, data = chunk("own")
        self.master.store_chunk(h, data, "f1")
        self.assertTrue(self.master.store_link(LinkRecord(h, "m1"), "f1"))
        self.assertEqual(self.master.links, {})
        self.assertEqual(self.master.table.links[h].holder, "m1")
        self.assertEqual(self.master.fetch_chunk(h).kind, msg.DATA)
        self.assertEqual(self.master.link_count, 1)

    def test_directory_answers_redirects_and_survives_restart(self):
        h, _ = chunk("elsewhere")
        self.master.store_link(LinkRecord(h, "m2", 7), "f1")
        self.assertEqual(self.master.fetch_chunk(h).holder, "m2")
        clone = DBNode("m1", "org-a", 100, 1000, role=NodeRole.MASTER, store=self.master.store)
        clone.load_state(self.master.to_state())
        self.assertEqual(clone.get_link(h).created_at, 7)
        clone.purge_file("f1")
        self.assertEqual(clone.references("f1"), 0)
        self.assertIsNone(clone.get_link(h))
