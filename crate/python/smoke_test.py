"""Smoke test for the pyccancel extension.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, or copy
target/release/libpyccancel.so to pyccancel.so somewhere on PYTHONPATH.
"""

import json
import sys

import pyccancel as cc

NECKLACE = [((0, 0), (0, 0)), ((1, 0), (1, 1)), ((0, 1), (1, 0)),
         ((1, 1), (1, 2)), ((0, 2), (0, 1)), ((1, 2), (0, 2))]

SUCC = json.dumps({
    "source": {"slots": [{"kind": "omega"}]},
    "target": {"slots": [{"kind": "omega"}]},
    "pieces": [{"src_slot": 0, "src_r": 0, "src_m": 1, "src_c": 0,
                "dst_slot": 0, "dst_r": 0, "dst_m": 1, "dst_c": 1}],
})


def check(name, cond):
    print(f"{'ok  ' if cond else 'FAIL'} {name}")
    return cond


def main():
    results = []
    two_fin3 = cc.Space([3, 3])
    f = cc.Map.from_table(two_fin3, two_fin3, NECKLACE)
    results.append(check("example map is a bijection", f.is_bijective()))

    g = cc.divide_by_two(f)
    table = [g(0, i) for i in range(3)]
    results.append(check("parentheses halve the example", table == [(0, 0), (0, 2), (0, 1)]))
    results.append(check("halved map verifies", g.verify()[0]))

    w, leftovers = cc.divide_by_two_2omega(f)
    results.append(check("2-omega variant leaves at most one per string", max(leftovers, default=0) <= 1))

    h = cc.divide(2, f)
    results.append(check("greedy division verifies", h.verify()[0] and h.kind == "bijection"))

    succ = cc.Map.from_json(SUCC)
    b = cc.csb(succ, succ)
    results.append(check("csb of two shifts is explicit", b.explicit and b.verify(500)[0]))
    results.append(check("csb witness round trips through JSON", cc.Witness.from_json(b.to_json()).map() == b.map()))

    try:
        cc.csb(succ, succ, fuel=3)
        results.append(check("starved walk raises UndecidedError", False))
    except cc.UndecidedError:
        results.append(check("starved walk raises UndecidedError", True))

    try:
        cc.Map.from_json("{\"source\": ")
        results.append(check("malformed JSON raises ParseError", False))
    except cc.ParseError:
        results.append(check("malformed JSON raises ParseError", True))

    text = cc.dot("arrows", f)
    results.append(check("dot output is deterministic", text == cc.dot("arrows", f) and text.startswith("graph arrows")))

    maps = dict(cc.generate_instance('{"kind": "bijection", "n": 3, "size_a": 4, "size_b": 4, "seed": 7}'))
    results.append(check("generated instance divides by three", cc.divide(3, maps["f"]).verify()[0]))

    return 0 if all(results) else 1


if __name__ == "__main__":
    sys.exit(main())
