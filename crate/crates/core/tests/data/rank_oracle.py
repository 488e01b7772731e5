"""Brute-force oracle for strength and partition rank over tiny prime fields.

Strength levels are computed as iterated sumsets of the set of all products
g*h (g, h forms of positive degree), so the result is independent of any
subspace search. Partition rank levels are iterated sumsets of all
partition-rank-one tensors. Output is frozen into rank_oracle.json.
"""
import itertools
import json


def monomials(n, d):
    out = []
    for c in itertools.combinations_with_replacement(range(n), d):
        e = [0] * n
        for i in c:
            e[i] += 1
        out.append(tuple(e))
    out.sort(reverse=True)
    return out


def all_forms(n, d, p):
    mons = monomials(n, d)
    for coeffs in itertools.product(range(p), repeat=len(mons)):
        yield {m: c for m, c in zip(mons, coeffs) if c}


def mul(a, b, p):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = tuple(x + y for x, y in zip(ma, mb))
            out[m] = (out.get(m, 0) + ca * cb) % p
    return {m: c for m, c in out.items() if c}


def key(f, mons):
    return tuple(f.get(m, 0) for m in mons)


def strength_levels(n, d, p):
    mons = monomials(n, d)
    index = {m: i for i, m in enumerate(mons)}
    products = set()
    for a in range(1, d // 2 + 1):
        ga = list(all_forms(n, a, p))
        hb = list(all_forms(n, d - a, p))
        for g in ga:
            for h in hb:
                products.add(key(mul(g, h, p), mons))
    zero = tuple([0] * len(mons))
    level = {zero: 0}
    frontier = {zero}
    r = 0
    total = p ** len(mons)
    while len(level) < total:
        r += 1
        nxt = set()
        for f in frontier:
            for q in products:
                s = tuple((x + y) % p for x, y in zip(f, q))
                if s not in level:
                    nxt.add(s)
        for s in nxt:
            level[s] = r
        frontier = nxt
    return mons, level


def histogram(level):
    h = {}
    for v in level.values():
        h[v] = h.get(v, 0) + 1
    return {str(k): h[k] for k in sorted(h)}


def tensor_levels(dims, p, parts):
    d = len(dims)
    idx = list(itertools.product(*[range(k) for k in dims]))
    pieces = set()
    for part in parts:
        rest = [b for b in range(d) if b not in part]
        left = list(itertools.product(range(p), repeat=prod(dims[b] for b in part)))
        right = list(itertools.product(range(p), repeat=prod(dims[b] for b in rest)))
        lidx = list(itertools.product(*[range(dims[b]) for b in part]))
        ridx = list(itertools.product(*[range(dims[b]) for b in rest]))
        lpos = {t: i for i, t in enumerate(lidx)}
        rpos = {t: i for i, t in enumerate(ridx)}
        for g in left:
            for h in right:
                t = []
                for full in idx:
                    gi = lpos[tuple(full[b] for b in part)]
                    hi = rpos[tuple(full[b] for b in rest)]
                    t.append(g[gi] * h[hi] % p)
                pieces.add(tuple(t))
    zero = tuple([0] * len(idx))
    level = {zero: 0}
    r = 0
    total = p ** len(idx)
    frontier = [zero]
    while len(level) < total:
        r += 1
        nxt = []
        for f in frontier:
            for q in pieces:
                s = tuple((x + y) % p for x, y in zip(f, q))
                if s not in level:
                    level[s] = r
                    nxt.append(s)
        frontier = nxt
    return idx, level


def prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


def lookup(mons, level, f, p):
    return level[tuple(f.get(m, 0) % p for m in mons)]


def main():
    out = {}
    # all quadratics in 4 variables over F_3
    mons, lv = strength_levels(4, 2, 3)
    out["quadratic_f3_n4_histogram"] = histogram(lv)
    x1x2_x3x4 = {(1, 1, 0, 0): 1, (0, 0, 1, 1): 1}
    out["str_f3_x1x2_plus_x3x4"] = lookup(mons, lv, x1x2_x3x4, 3)
    # relative strength mod (x1): restrict x1 = 0 then strength in x2..x4
    mons3, lv3 = strength_levels(3, 2, 3)
    out["str_f3_x1x2_plus_x3x4_mod_x1"] = lookup(mons3, lv3, {(0, 1, 1): 1}, 3)
    combos = []
    g1 = {(1, 1, 0, 0): 1, (0, 0, 1, 1): 1}
    g2 = {(1, 0, 1, 0): 1, (0, 1, 0, 1): 1}
    for a, b in [(0, 1), (1, 0), (1, 1), (1, 2)]:
        f = {}
        for m, c in g1.items():
            f[m] = (f.get(m, 0) + a * c) % 3
        for m, c in g2.items():
            f[m] = (f.get(m, 0) + b * c) % 3
        combos.append(lookup(mons, lv, f, 3))
    out["collective_f3_pair_per_tuple"] = combos
    out["collective_f3_pair"] = min(combos)
    # all quadratics in 3 variables over F_5
    _, lv = strength_levels(3, 2, 5)
    out["quadratic_f5_n3_histogram"] = histogram(lv)
    # all ternary cubics over F_2 and F_3
    _, lv = strength_levels(3, 3, 2)
    out["cubic_f2_n3_histogram"] = histogram(lv)
    # binary quartics over F_3 (quadratic factors allowed)
    _, lv = strength_levels(2, 4, 3)
    out["quartic_f3_n2_histogram"] = histogram(lv)
    # partition rank of 2x2x2 tensors over F_2
    all3 = [(0,), (0, 1), (0, 2)]
    idx, lv = tensor_levels([2, 2, 2], 2, all3)
    out["prk_f2_222_histogram"] = histogram(lv)
    t = tuple(1 if (i == j == k) else 0 for (i, j, k) in idx)
    out["prk_f2_diag2"] = lv[t]
    # d = 4: slice rank versus partition rank, dims (2,2,2,2) over F_2
    slice_parts = [(0,), (0, 2, 3), (0, 1, 3), (0, 1, 2)]
    all_parts = [(0,), (0, 1), (0, 2), (0, 3), (0, 1, 2), (0, 1, 3), (0, 2, 3)]
    _, lv = tensor_levels([2, 2, 2, 2], 2, slice_parts)
    out["slice_rank_f2_2222_histogram"] = histogram(lv)
    _, lv = tensor_levels([2, 2, 2, 2], 2, all_parts)
    out["prk_f2_2222_histogram"] = histogram(lv)
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
