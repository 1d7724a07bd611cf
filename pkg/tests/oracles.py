"""Independent reference implementations used as test oracles."""

import itertools
import math


def brute_contract(g, a):
    """Hyper-edge weights by enumerating every inter-community node pair."""
    W = g.dense_adjacency()
    out = {}
    for i, j in itertools.combinations(range(a.k), 2):
        mass = sum(W[u, v] for u in a.members(i) for v in a.members(j))
        if mass > 0:
            out[(i, j)] = mass / (a.sizes[i] * a.sizes[j])
    return out


def direct_ndcg(target, reference):
    """Literal NDCG: sort, intersect prefixes as sets, sum the gains."""
    def order(s):
        return sorted(range(len(s)), key=lambda i: (-s[i], i))
    a, b = order(target), order(reference)
    dcg = idcg = 0.0
    for i in range(1, len(a) + 1):
        r = len(set(a[:i]) & set(b[:i]))
        dcg += (2**r - 1) / math.log2(i + 1)
        idcg += (2**i - 1) / math.log2(i + 1)
    return dcg / idcg


def bernoulli_kl(p, q, s):
    """Plain textbook sum of clamped Bernoulli KL terms."""
    total = 0.0
    for x, y in zip(p, q):
        x = min(max(x, s), 1 - s)
        y = min(max(y, s), 1 - s)
        total += x * math.log(x / y) + (1 - x) * math.log((1 - x) / (1 - y))
    return total
