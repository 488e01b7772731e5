"""Independent oracle for the geometry golden corpus.

Computes reduced Groebner bases with sympy (grlex) and the affine dimension
of each ideal from its leading monomials (maximal independent variable set).
Run once; the output is frozen into geometry_golden.json.
"""
import itertools
import json

import sympy as sp

CORPUS = [
    ("coordinate line", 3, ["x1", "x2"]),
    ("hypersurface x1x2", 3, ["x1*x2"]),
    ("two binomials", 4, ["x1*x2", "x3*x4"]),
    ("quadric pair", 4, ["x1*x2 + x3*x4", "x1*x3 - x2*x4"]),
    ("fat point mixed", 2, ["x1^2", "x1*x2 - x1"]),
    ("sphere cone", 3, ["x1^2 + x2^2 + x3^2"]),
    ("twisted cubic", 4, ["x1*x3 - x2^2", "x2*x4 - x3^2", "x1*x4 - x2*x3"]),
    ("monomial cubic", 3, ["x1*x2*x3"]),
    ("jacobian of x1x2x3", 3, ["x2*x3", "x1*x3", "x1*x2"]),
    ("jacobian of fermat cubic", 3, ["3*x1^2", "3*x2^2", "3*x3^2"]),
    ("jacobian minors of x1x2, x3x4", 4, ["x2*x4", "x2*x3", "x1*x4", "x1*x3"]),
    ("jacobian minors of two sums of squares", 4, ["4*x1*x3", "4*x1*x4", "4*x2*x3", "4*x2*x4"]),
    ("elementary symmetric", 3, ["x1 + x2 + x3", "x1*x2 + x2*x3 + x1*x3", "x1*x2*x3"]),
    ("binomial pair", 3, ["x1*x2 - x3^2", "x1*x3 - x2^2"]),
    ("cyclic binomials", 3, ["x1^2 - x2*x3", "x2^2 - x1*x3"]),
    ("cubic pair", 4, ["x1^3 - x2*x3*x4", "x2^3 - x1*x3*x4"]),
    ("rank five quadric", 5, ["x1*x2 + x3*x4 + x5^2"]),
    ("determinant", 4, ["x1*x4 - x2*x3"]),
    ("2x3 minors", 6, ["x1*x5 - x2*x4", "x1*x6 - x3*x4", "x2*x6 - x3*x5"]),
    ("jacobian minors of sphere and x1x2+x3^2", 3,
     ["2*x1^2 - 2*x2^2", "4*x1*x3 - 2*x2*x3", "4*x2*x3 - 2*x1*x3"]),
    ("affine circle meets line", 2, ["x1^2 + x2^2 - 1", "x1 - x2"]),
    ("unit ideal", 2, ["x1", "x1 - 1"]),
]


def dimension(lead_monomials, n):
    if any(all(e == 0 for e in m) for m in lead_monomials):
        return -1
    best = 0
    for k in range(n, -1, -1):
        for subset in itertools.combinations(range(n), k):
            s = set(subset)
            ok = all(any(m[i] > 0 and i not in s for i in range(n)) for m in lead_monomials)
            if ok:
                return k
    return best


def main():
    out = []
    for name, n, gens in CORPUS:
        xs = sp.symbols(" ".join(f"x{i+1}" for i in range(n)))
        if n == 1:
            xs = (xs,)
        polys = [sp.sympify(g.replace("^", "**"), locals={f"x{i+1}": xs[i] for i in range(n)}) for g in gens]
        gb = sp.groebner(polys, *xs, order="grlex")
        leads = [sp.Poly(g, *xs).monoms(order="grlex")[0] for g in gb.exprs]
        dim = dimension(leads, n)
        out.append({
            "name": name,
            "nvars": n,
            "generators": gens,
            "dim": dim,
            "basis": [str(sp.Poly(g, *xs).as_expr()).replace("**", "^") for g in gb.exprs],
        })
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
