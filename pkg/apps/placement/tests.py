import hashlib
import itertools
import random

from django.test import SimpleTestCase

from apps.core.constants import LINK_RECORD_BYTES
from apps.core.exceptions import ChunkNotFound, PlacementImpossible
from apps.erasure.params import CodeParams, validate_params
from apps.hashslot.tables import SlotTables

from .links import LinkRecord
from .planner import designate_stripe, plan_stripe, resolve
from .redundancy import check_by_enumeration, tolerates, worst_survivors
from .state import PlacementState

REFERENCE = CodeParams(N=6, M=3, x=3, y=1, n=6, k=3, l=3)
EVAL = CodeParams(N=12, M=4, x=3, y=1, n=6, k=3, l=3)


def reference_tables():
    return SlotTables.build(
        {"org-a": 1000, "org-b": 1000, "org-c": 1000},
        {org: {f"{org[-1]}1": 1, f"{org[-1]}2": 1} for org in ("org-a", "org-b", "org-c")},
    )


def eval_tables():
    orgs = [f"org-{i}" for i in range(1, 5)]
    return SlotTables.build(
        {o: 1000 for o in orgs},
        {o: {f"{o}-n{j}": 1 for j in range(1, 4)} for o in orgs},
    )


class SlotHashes:
    """Deterministic hashes looked up by the node the slot tables designate."""

    def __init__(self, tables):
        self.tables = tables
        self.counter = itertools.count()

    def designated_to(self, node):
        while True:
            h = hashlib.sha256(f"sample-{next(self.counter)}".encode()).hexdigest()
            if self.tables.designate(h)[1] == node:
                return h


def random_hashes(rng, count):
    return [rng.randbytes(32).hex() for _ in range(count)]


class FakeNode:
    def __init__(self):
        self.chunks = set()
        self.links = {}

    def has_chunk(self, h):
        return h in self.chunks

    def get_link(self, h):
        return self.links.get(h)


class LinkRecordTests(SimpleTestCase):

    def test_encoded_size_is_128_bytes(self):
        link = LinkRecord(hashlib.sha256(b"c").hexdigest(), "p2", 1)
        self.assertEqual(len(link.encode()), LINK_RECORD_BYTES)
        self.assertEqual(link.size, 128)
        self.assertEqual(LinkRecord.from_dict(link.as_dict()), link)

    def test_malformed_hash_rejected(self):
        with self.assertRaises(ValueError):
            LinkRecord("abc", "p1")


class PlanStripeTests(SimpleTestCase):
    """Stripes are built in group order: chunk i belongs to group i mod 3."""

    def setUp(self):
        self.tables = reference_tables()
        self.hashes = SlotHashes(self.tables)

    def _spread(self, *nodes):
        return [self.hashes.designated_to(n) for n in nodes]

    def test_conflict_free_stripe_has_no_links(self):
        hashes = self._spread("a1", "b1", "c1", "a2", "b2", "c2")
        plan = plan_stripe(hashes, self.tables, REFERENCE)
        self.assertEqual(plan.links, [])
        self.assertEqual(plan.holders, ["a1", "b1", "c1", "a2", "b2", "c2"])

    def test_mirror_pair_opens_and_closes(self):
        """Group chunks collide on a1, the second goes to a2; a later collision on a2 goes back to a1."""
        state = PlacementState()
        first = plan_stripe(self._spread("a1", "b1", "c1", "a1", "b2", "c2"),
                            self.tables, REFERENCE, state=state)
        self.assertEqual(first.holders[3], "a2")
        self.assertEqual(len(first.links), 1)
        self.assertEqual(first.links[0].holder, "a2")
        self.assertEqual(first.mirrors_opened, [("a2", "a1")])
        self.assertEqual(state.pending_pairs(), [("a2", "a1")])

        second = plan_stripe(self._spread("a2", "b1", "c1", "a2", "b2", "c2"),
                             self.tables, REFERENCE, state=state)
        self.assertEqual(second.holders[0], "a2")
        self.assertEqual(second.holders[3], "a1")
        self.assertEqual(second.mirrors_closed, [("a2", "a1")])
        self.assertEqual(state.pending_pairs(), [])

    def test_pending_mirror_only_applies_to_diverted_chunks(self):
        state = PlacementState()
        state.open_mirror("a2", "a1")
        plan = plan_stripe(self._spread("a2", "b1", "c1", "a1", "b2", "c2"),
                           self.tables, REFERENCE, state=state)
        self.assertEqual(plan.holders[0], "a2")
        self.assertEqual(plan.links, [])
        self.assertEqual(state.pending_pairs(), [("a2", "a1")])

    def test_random_stripes_respect_group_rules(self):
        rng = random.Random(11)
        state = PlacementState()
        for _ in range(300):
            hashes = random_hashes(rng, 6)
            plan = plan_stripe(hashes, self.tables, REFERENCE, state=state)
            self.assertEqual(len(set(plan.holders)), 6)
            counts = plan.org_counts()
            self.assertEqual(len(counts), REFERENCE.l)
            self.assertLessEqual(max(counts.values()), REFERENCE.group_cap)
            for entry in plan.entries:
                self.assertEqual(self.tables.org_of_node(entry.holder), entry.holder_org)
                if entry.index + REFERENCE.l < 6:
                    partner = plan.entries[entry.index + REFERENCE.l]
                    self.assertEqual(entry.holder_org, partner.holder_org)

    def test_group_organizations_are_distinct_designations(self):
        rng = random.Random(14)
        for _ in range(200):
            hashes = random_hashes(rng, 6)
            designations = designate_stripe(hashes, self.tables, REFERENCE.l)
            self.assertEqual(len({org for org, _ in designations[:3]}), 3)
            for i in range(3):
                self.assertEqual(designations[i][0], designations[i + 3][0])
            self.assertEqual(plan_stripe(hashes, self.tables, REFERENCE).designations, designations)

    def test_links_equal_collisions_on_three_by_two(self):
        rng = random.Random(12)
        for _ in range(200):
            hashes = random_hashes(rng, 6)
            distinct = len({node for _, node in designate_stripe(hashes, self.tables, REFERENCE.l)})
            plan = plan_stripe(hashes, self.tables, REFERENCE)
            self.assertEqual(len(plan.links), 6 - distinct)
            self.assertEqual(len(plan.links), sum(e.diverted for e in plan.entries))

    def test_eval_stripes_never_span_four_organizations(self):
        tables = eval_tables()
        rng = random.Random(13)
        state = PlacementState()
        for _ in range(200):
            plan = plan_stripe(random_hashes(rng, 6), tables, EVAL, state=state)
            self.assertEqual(len(plan.org_counts()), EVAL.l)
            self.assertEqual(set(plan.org_counts().values()), {2})

    def test_unavailable_node_is_avoided(self):
        tables = eval_tables()
        sample = SlotHashes(tables)
        hashes = [sample.designated_to(n) for n in (
            "org-1-n1", "org-2-n1", "org-3-n1", "org-1-n2", "org-2-n2", "org-3-n2")]
        state = PlacementState(unavailable={"org-1-n1"})
        plan = plan_stripe(hashes, tables, EVAL, state=state)
        self.assertNotIn("org-1-n1", plan.holders)
        self.assertEqual(plan.holders[0], "org-1-n3")
        self.assertEqual(len(plan.links), 1)

    def test_too_few_live_nodes_is_impossible(self):
        state = PlacementState(unavailable={"a1"})
        with self.assertRaises(PlacementImpossible):
            plan_stripe(self._spread("a1", "b1", "c1", "a2", "b2", "c2"),
                        self.tables, REFERENCE, state=state)

    def test_placement_is_deterministic(self):
        hashes = random_hashes(random.Random(4), 6)
        self.assertEqual(plan_stripe(hashes, self.tables, REFERENCE).holders,
                         plan_stripe(hashes, self.tables, REFERENCE).holders)


class ExclusionTests(SimpleTestCase):

    def setUp(self):
        self.tables = eval_tables()

    def test_excluded_org_stores_no_data(self):
        rng = random.Random(21)
        state = PlacementState()
        for _ in range(100):
            plan = plan_stripe(random_hashes(rng, 6), self.tables, EVAL,
                               exclusions={"org-2"}, state=state)
            self.assertNotIn("org-2", plan.org_counts())
            for entry in plan.entries:
                if entry.designated_org == "org-2":
                    self.assertTrue(entry.diverted)

    def test_too_many_exclusions_is_impossible(self):
        with self.assertRaises(PlacementImpossible):
            plan_stripe(random_hashes(random.Random(1), 6), self.tables, EVAL,
                        exclusions={"org-1", "org-2"})

    def test_three_by_two_cannot_exclude_an_org(self):
        with self.assertRaises(PlacementImpossible):
            plan_stripe(random_hashes(random.Random(1), 6), reference_tables(), REFERENCE,
                        exclusions={"org-a"})


class ResolveTests(SimpleTestCase):

    def setUp(self):
        self.tables = reference_tables()
        self.nodes = {n: FakeNode() for org in self.tables.organizations
                      for n in self.tables.nodes_of(org)}
        self.h = SlotHashes(self.tables).designated_to("b1")

    def test_designated_holder(self):
        self.nodes["b1"].chunks.add(self.h)
        self.assertEqual(resolve(self.h, self.tables, self.nodes), "b1")

    def test_follows_one_link(self):
        self.nodes["b2"].chunks.add(self.h)
        self.nodes["b1"].links[self.h] = LinkRecord(self.h, "b2")
        self.assertEqual(resolve(self.h, self.tables, self.nodes), "b2")

    def test_master_link_copy_used_when_designated_knows_nothing(self):
        self.nodes["c1"].chunks.add(self.h)
        self.nodes["b2"].links[self.h] = LinkRecord(self.h, "c1")
        self.assertEqual(resolve(self.h, self.tables, self.nodes, {"org-b": "b2"}), "c1")

    def test_stripe_designation_overrides_single_lookup(self):
        self.nodes["a2"].chunks.add(self.h)
        self.assertEqual(resolve(self.h, self.tables, self.nodes, designation=("org-a", "a2")), "a2")
        with self.assertRaises(ChunkNotFound):
            resolve(self.h, self.tables, self.nodes)

    def test_missing_chunk_not_found(self):
        self.nodes["b1"].links[self.h] = LinkRecord(self.h, "b2")
        with self.assertRaises(ChunkNotFound):
            resolve(self.h, self.tables, self.nodes)


class RedundancyTests(SimpleTestCase):

    def test_planned_stripes_survive_every_failure_set(self):
        tables = reference_tables()
        nodes_by_org = {o: list(tables.nodes_of(o)) for o in tables.organizations}
        rng = random.Random(31)
        state = PlacementState()
        stripes = [plan_stripe(random_hashes(rng, 6), tables, REFERENCE, state=state).holders
                   for _ in range(50)]
        self.assertTrue(tolerates(stripes, nodes_by_org, REFERENCE))
        self.assertEqual(worst_survivors(stripes, nodes_by_org, 3, 1), 3)

    def test_enumerator_agrees_with_validator(self):
        for M in range(1, 5):
            for per_org in range(1, 4):
                N = M * per_org
                for n, l, x, y in itertools.product(range(2, N + 1), range(1, M + 1),
                                                    range(1, 4), range(1, 3)):
                    for k in range(1, n):
                        params = CodeParams(N=N, M=M, x=x, y=y, n=n, k=k, l=l)
                        ok = validate_params(params).ok
                        brute = check_by_enumeration(params)
                        if ok:
                            self.assertTrue(brute, params)
                        if y == 1:
                            self.assertEqual(ok, brute, params)
