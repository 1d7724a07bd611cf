"""
Reading NDCG values
===================

The gain of rank i is 2^{r_i} - 1, so the last few prefixes dominate both sums.
Whatever happens at the top of the ranking, the value can never drop much below
2/3, and it jumps to about 0.83 as soon as the two lowest-ranked items agree.
"""

import numpy as np

from hcpd import ScoreSeries, ndcg

rng = np.random.default_rng(0)
n = 60
ref = ScoreSeries("original", range(n), rng.random(n))

###############################################################################
# Two unrelated random rankings.

vals = [ndcg(ScoreSeries("global", range(n), rng.random(n)), ref) for _ in range(2000)]
print("random rankings: min %.3f  median %.3f  max %.3f" % (min(vals), np.median(vals), max(vals)))

###############################################################################
# Same top-10 as the reference but a shuffled tail, versus shuffled top and a
# matching bottom element.

order = np.argsort(-ref.scores)
top_kept = ref.scores.copy()
top_kept[order[10:]] = rng.permutation(ref.scores[order[10:]])
print("top-10 kept, tail shuffled: %.3f" % ndcg(ScoreSeries("global", range(n), top_kept), ref))

tail_kept = rng.random(n) + 1
tail_kept[order[-1]] = 0
print("only the lowest item kept:  %.3f" % ndcg(ScoreSeries("global", range(n), tail_kept), ref))
