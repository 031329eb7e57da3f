# apps/placement/redundancy.py
"""
Brute-force failure enumeration.

Walks every set of at most x failed nodes and, separately, every set of at
most y failed organizations, and counts the chunks of each stripe that
survive.
"""
import itertools

from apps.erasure.params import CodeParams


def failure_sets(nodes_by_org: dict, x: int, y: int):
    nodes = sorted(n for members in nodes_by_org.values() for n in members)
    for size in range(0, min(x, len(nodes)) + 1):
        for dead in itertools.combinations(nodes, size):
            yield frozenset(dead)
    orgs = sorted(nodes_by_org)
    for size in range(1, min(y, len(orgs)) + 1):
        for dead_orgs in itertools.combinations(orgs, size):
            yield frozenset(n for o in dead_orgs for n in nodes_by_org[o])


def worst_survivors(stripes, nodes_by_org: dict, x: int, y: int) -> int:
    """
    Fewest surviving chunks of any stripe over every failure set.
    `stripes` is an iterable of holder-node lists, one per stripe.
    """
    stripes = [list(s) for s in stripes]
    if not stripes:
        return 0
    worst = min(len(s) for s in stripes)
    for dead in failure_sets(nodes_by_org, x, y):
        for holders in stripes:
            worst = min(worst, sum(1 for h in holders if h not in dead))
    return worst


def tolerates(stripes, nodes_by_org: dict, params: CodeParams) -> bool:
    return worst_survivors(stripes, nodes_by_org, params.x, params.y) >= params.k


def adversarial_layout(params: CodeParams):
    """
    The group layout the rules allow that concentrates the most chunks in
    the fewest organizations: l groups of 1..ceil(n/l) chunks, filled
    greedily, each group in its own organization on distinct nodes.
    Returns (nodes_by_org, holders) or None when no legal layout exists.
    """
    p = params
    if p.k >= p.n or p.l > p.n or p.l > p.M or p.n > p.N:
        return None
    sizes = [1] * p.l
    extra = p.n - p.l
    for g in range(p.l):
        grow = min(p.group_cap - 1, extra)
        sizes[g] += grow
        extra -= grow
    if extra or max(sizes) > p.nodes_per_org:
        return None
    nodes_by_org = {f"o{o}": [f"o{o}n{j}" for j in range(p.nodes_per_org)] for o in range(p.M)}
    holders = [f"o{g}n{j}" for g, size in enumerate(sizes) for j in range(size)]
    return nodes_by_org, holders


def check_by_enumeration(params: CodeParams) -> bool:
    layout = adversarial_layout(params)
    if layout is None:
        return False
    nodes_by_org, holders = layout
    return tolerates([holders], nodes_by_org, params)
