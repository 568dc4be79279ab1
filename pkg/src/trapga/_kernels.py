"""Compiled inner loops.

Every kernel draws from the ``numpy.random.Generator`` it is given, so the
numbers consumed are the same ones numpy would hand out and a seeded run
replays exactly. Draw order per kernel is part of its contract and is
documented on each function.
"""

import math

import numpy as np
from numba import njit

TOURNAMENT = 0
PROPORTIONAL = 1

_TWO53 = 9007199254740992.0


@njit(cache=True)
def select(fitness, k, rng, scheme):
    """``k`` parent indices.

    Tournament, per pick: two ``integers(0, n)`` draws, then one ``random()``
    coin used only on a tie. Proportional, per pick: one ``random()`` spun on
    the cumulative fitness wheel.
    """
    n = fitness.shape[0]
    out = np.empty(k, dtype=np.int64)
    if scheme == TOURNAMENT:
        for i in range(k):
            a = rng.integers(0, n)
            b = rng.integers(0, n)
            coin = rng.random() < 0.5
            fa = fitness[a]
            fb = fitness[b]
            if fa > fb or (fa == fb and coin):
                out[i] = a
            else:
                out[i] = b
        return out
    total = 0.0
    for j in range(n):
        total += fitness[j]
    for i in range(k):
        u = rng.random()
        if total <= 0.0:
            out[i] = min(int(u * n), n - 1)
            continue
        target = u * total
        acc = 0.0
        pick = n - 1
        for j in range(n):
            acc += fitness[j]
            if target < acc:
                pick = j
                break
        out[i] = pick
    return out


@njit(cache=True)
def crossover(genomes, first, second, pc, rng):
    """Uniform crossover of row pairs.

    Child ``i`` of the first block takes parent ``first[i]``'s allele where
    the swap bit is 1 and ``second[i]``'s otherwise; child ``k + i`` takes the
    other allele. Swap bits come 53 at a time from ``random() * 2**53``,
    least significant bit first, carried across pairs. When ``pc < 1`` each
    pair first spends one ``random()``; a value ``>= pc`` makes both
    children clones.
    """
    k = first.shape[0]
    length = genomes.shape[1]
    out = np.empty((2 * k, length), dtype=np.uint8)
    word = np.uint64(0)
    left = 0
    for i in range(k):
        p1 = genomes[first[i]]
        p2 = genomes[second[i]]
        if pc < 1.0 and rng.random() >= pc:
            out[i, :] = p1
            out[k + i, :] = p2
            continue
        for j in range(length):
            if left == 0:
                word = np.uint64(rng.random() * _TWO53)
                left = 53
            bit = word & np.uint64(1)
            word = word >> np.uint64(1)
            left -= 1
            if bit:
                out[i, j] = p1[j]
                out[k + i, j] = p2[j]
            else:
                out[i, j] = p2[j]
                out[k + i, j] = p1[j]
    return out


@njit(cache=True)
def mutate(genomes, pm, rng):
    """Flip each bit independently with probability ``pm``, in place.

    Uses geometric gap sampling over the row-major flattened array: one
    ``random()`` per flipped bit plus one that overshoots the end.
    """
    if pm <= 0.0:
        return genomes
    flat = genomes.reshape(-1)
    total = flat.shape[0]
    if pm >= 1.0:
        for j in range(total):
            flat[j] = 1 - flat[j]
        return genomes
    log_q = math.log1p(-pm)
    if log_q == 0.0:
        # pm below double resolution: no flip is representable
        return genomes
    pos = -1
    while True:
        u = rng.random()
        gap = math.log1p(-u) / log_q
        # compare before truncating: inf or NaN would become a garbage index
        if not gap < total:
            break
        pos += int(gap) + 1
        if pos >= total:
            break
        flat[pos] = 1 - flat[pos]
    return genomes


@njit(cache=True)
def trap_fitness(genomes, mask, table, block):
    """Summed block trap values of ``genomes XOR mask``, one per row."""
    n, length = genomes.shape
    out = np.empty(n)
    for r in range(n):
        s = 0.0
        for start in range(0, length, block):
            u = 0
            for j in range(start, start + block):
                u += genomes[r, j] ^ mask[j]
            s += table[u]
        out[r] = s
    return out


@njit(cache=True)
def row_distances(genomes, first, second):
    k = first.shape[0]
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        a = genomes[first[i]]
        b = genomes[second[i]]
        d = 0
        for j in range(a.shape[0]):
            d += a[j] != b[j]
        out[i] = d
    return out


@njit(cache=True)
def pick_partners(genomes, first, pool_size, negative, rng):
    """Second parents from random pools of distinct non-first members.

    Per first parent: a partial Fisher-Yates shuffle over the other
    ``n - 1`` indices, one ``integers(i, n - 1)`` per pool slot. The pool
    member with the largest (``negative``) or smallest distance wins; ties
    go to the earliest slot.
    """
    n, length = genomes.shape
    k = first.shape[0]
    out = np.empty(k, dtype=np.int64)
    others = np.empty(n - 1, dtype=np.int64)
    for e in range(k):
        f = first[e]
        c = 0
        for j in range(n):
            if j != f:
                others[c] = j
                c += 1
        best = -1
        best_d = -1
        for i in range(pool_size):
            s = rng.integers(i, n - 1)
            tmp = others[i]
            others[i] = others[s]
            others[s] = tmp
            cand = others[i]
            d = 0
            for j in range(length):
                d += genomes[f, j] != genomes[cand, j]
            if best < 0 or (negative and d > best_d) or (not negative and d < best_d):
                best = cand
                best_d = d
        out[e] = best
    return out


@njit(cache=True)
def mean_pairwise_distance(genomes):
    n, length = genomes.shape
    total = 0.0
    for j in range(length):
        ones = 0
        for r in range(n):
            ones += genomes[r, j]
        total += ones * (n - ones)
    return total / (n * (n - 1) / 2.0)


@njit(cache=True)
def elitism(elite_genomes, elite_fitness, genomes, fitness):
    """In-place elite re-insertion; see :func:`trapga.gacore.apply_elitism`."""
    n, length = genomes.shape
    protected = np.zeros(n, dtype=np.bool_)
    for e in range(elite_genomes.shape[0]):
        at = -1
        for r in range(n):
            same = True
            for j in range(length):
                if genomes[r, j] != elite_genomes[e, j]:
                    same = False
                    break
            if same:
                at = r
                break
        if at >= 0:
            protected[at] = True
            continue
        worst = -1
        for r in range(n):
            if protected[r]:
                continue
            if worst < 0 or fitness[r] < fitness[worst] or (
                fitness[r] == fitness[worst] and r > worst
            ):
                worst = r
        if worst >= 0 and elite_fitness[e] > fitness[worst]:
            genomes[worst, :] = elite_genomes[e]
            fitness[worst] = elite_fitness[e]
            protected[worst] = True


@njit(cache=True)
def offspring(genomes, fitness, n_pairs, scheme, pm, pc, rng):
    """Select ``2 * n_pairs`` parents, recombine pairs, mutate children.

    Same draws, in the same order, as :func:`select` followed by
    :func:`crossover` and :func:`mutate`.
    """
    parents = select(fitness, 2 * n_pairs, rng, scheme)
    children = crossover(genomes, parents[:n_pairs], parents[n_pairs:], pc, rng)
    return mutate(children, pm, rng)


@njit(cache=True)
def dissortative_batch(genomes, fitness, events, threshold, scheme, pm, pc, rng):
    """One batch of threshold-restricted mating events.

    Selects ``2 * events`` parents, pairs first half with second half, and
    breeds only the pairs at Hamming distance ``>= threshold``. Returns the
    children (two per successful pair) and the number of successes.
    """
    parents = select(fitness, 2 * events, rng, scheme)
    first = parents[:events]
    second = parents[events:]
    distance = row_distances(genomes, first, second)
    ok = distance >= threshold
    n_ok = 0
    for i in range(events):
        if ok[i]:
            n_ok += 1
    if n_ok == 0:
        return np.empty((0, genomes.shape[1]), dtype=np.uint8), 0
    children = crossover(genomes, first[ok], second[ok], pc, rng)
    return mutate(children, pm, rng), n_ok


@njit(cache=True)
def assortative_offspring(genomes, fitness, n_pairs, pool_size, negative, scheme, pm, pc, rng):
    """First parents by selection, second parents from similarity pools."""
    first = select(fitness, n_pairs, rng, scheme)
    second = pick_partners(genomes, first, pool_size, negative, rng)
    children = crossover(genomes, first, second, pc, rng)
    return mutate(children, pm, rng)


@njit(cache=True)
def generation_stats(fitness, genomes):
    """Best fitness, mean fitness and mean pairwise distance in one pass."""
    best = fitness[0]
    total = 0.0
    for i in range(fitness.shape[0]):
        total += fitness[i]
        if fitness[i] > best:
            best = fitness[i]
    return best, total / fitness.shape[0], mean_pairwise_distance(genomes)
