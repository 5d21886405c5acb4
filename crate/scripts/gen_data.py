#!/usr/bin/env python3
"""Regenerate the JSONL data files under crates/core/data with PARI/GP.

Requires cypari2. Run from the repository root:

    python3 scripts/gen_data.py [--max-ns 47] [--max-x0 500]
"""
import argparse
import json
import os
import re
import sys

import cypari2

pari = cypari2.Pari()
pari.allocatemem(2 * 10**9)
pari.set_real_precision(40)

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data")

# Curves identified by Weierstrass coefficients (no curve database needed).
CURVE_37A = [0, 0, 1, -1, 0]
BASE_CURVES = {
    61: [1, 0, 0, -2, 1],
    73: [1, -1, 0, 4, -3],
    101: [0, 1, 1, -1, -1],
    109: [1, -1, 0, -8, -7],
    113: [1, 1, 1, 3, -4],
}
# j-invariant of the curves with CM by the order of discriminant -67.
J_CM_67 = -147197952000



def real_str(x, digits):
    s = str(pari("(x, d) -> strprintf(Str(\"%.\", d, \"g\"), x)")(x, digits))
    float(s)
    return "NUM:" + s


def stated_precision(row):
    """Decimal places every float in the row is trusted to, with two digits of margin."""
    nums = []
    for v in row.values():
        for x in v if isinstance(v, list) else [v]:
            if isinstance(x, str) and x.startswith("NUM:"):
                nums.append(x[4:])
    return min(len(n.split(".")[1]) if "." in n else 0 for n in nums) - 2


def write_jsonl(name, rows):
    path = os.path.join(OUT, name)
    with open(path, "w") as fh:
        for r in rows:
            if "prec" in r:
                r = dict(r)
                r["prec"] = stated_precision(r)
                r["prec"] = r.pop("prec")
            line = json.dumps(r, separators=(",", ":"))
            # Decimal strings become bare JSON numbers with all their digits.
            fh.write(re.sub(r'"NUM:([^"]+)"', r"\1", line) + "\n")
    print(f"wrote {path} ({len(rows)} records)", file=sys.stderr)


def newform_records(level, count):
    mf = pari.mfinit([level, 2], 0)
    forms = pari.mfeigenbasis(mf)
    signs = pari.mfatkineigenvalues(mf, level)
    rows = []
    for i, f in enumerate(forms):
        fields = pari.mffields(mf)[i]
        degree = int(pari.poldegree(fields))
        eps = int(signs[i][0])
        coeffs = pari.mfcoefs(f, count)[1:]
        label = f"{level}.2.a.{chr(ord('a') + i)}"
        if degree == 1:
            an = [int(c) for c in coeffs]
            rows.append({"label": label, "level": level, "weight": 2, "fricke_sign": eps,
                         "orbit_size": 1, "an": an})
        else:
            emb = pari.mfembed(f, coeffs)
            # First real embedding.
            vals = [pari.real(c) for c in emb[0]]
            an = [real_str(v, 25) for v in vals]
            rows.append({"label": label, "level": level, "weight": 2, "fricke_sign": eps,
                         "orbit_size": degree, "an": an, "prec": None})
    return rows


def curve_record(label, E):
    rank, lval = pari.ellanalyticrank(E)
    deg = pari.ellmoddegree(E)
    area = pari("(e) -> e.area")(E)
    norm = deg * area / (4 * pari.Pi() ** 2)
    row = {"label": label, "conductor": int(pari.ellglobalred(E)[0]), "analytic_rank": int(rank)}
    if int(rank) == 1:
        row["lprime"] = real_str(lval, 25)
    row["petersson_norm"] = real_str(norm, 25)
    row["prec"] = None
    return row


def count_plus(mf, level):
    """Dimension of the Fricke +1 eigenspace, counted over all embeddings."""
    if int(pari.mfdim(mf)) == 0:
        return 0
    return sum(1 for orbit in pari.mfatkineigenvalues(mf, level) for e in orbit if int(e) == 1)


def minimal(E):
    return pari.ellinit(pari.ellminimalmodel(E))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--max-ns", type=int, default=47)
    ap.add_argument("--max-x0", type=int, default=500)
    args = ap.parse_args()

    # Newforms: 37a from the curve, all of level 67 from modular symbols.
    e37 = pari.ellinit(CURVE_37A)
    rows = [{"label": "37.2.a.a", "level": 37, "weight": 2, "fricke_sign": 1, "orbit_size": 1,
             "an": [int(a) for a in pari.ellan(e37, 1000)]}]
    rows += newform_records(67, 600)
    write_jsonl("newforms.jsonl", rows)

    # Rank-one curves at the levels N^2 of the nonsplit-Cartan screen.
    curves = [curve_record("37a1", e37)]
    for n in sorted(list(BASE_CURVES) + [67]):
        if n == 67:
            e0 = pari.ellinit(pari.ellfromj(J_CM_67))
            d = pari.ellminimaltwist(e0)
        else:
            e0 = pari.ellinit(BASE_CURVES[n])
            assert int(pari.ellglobalred(e0)[0]) == n
            d = n if n % 4 == 1 else -n
        et = minimal(pari.ellinit(pari.elltwist(e0, d)))
        assert int(pari.ellglobalred(et)[0]) == n * n
        curves.append(curve_record(f"{n * n}.tw{n}", et))
    write_jsonl("curves.jsonl", curves)

    # dim S_2(Gamma_0(N^2))^{+,new} = (dim + tr w) / 2.
    dims = []
    for n in pari.primes([2, args.max_ns]):
        n = int(n)
        mf = pari.mfinit([n * n, 2], 0)
        plus = count_plus(mf, n * n)
        dims.append({"level_param": n, "dim_plus_new": plus})
        print(f"  ns {n}: {plus}", file=sys.stderr, flush=True)
    write_jsonl("ns_dimensions.jsonl", dims)

    # Genus of X_0(p)^+ as dim S_2(Gamma_0(p))^+ for the cross-check test.
    genera = []
    for p in pari.primes([2, args.max_x0]):
        p = int(p)
        mf = pari.mfinit([p, 2], 0)
        genera.append({"level": p, "genus_x0plus": count_plus(mf, p)})
    write_jsonl("x0plus_genera.jsonl", genera)


if __name__ == "__main__":
    main()
