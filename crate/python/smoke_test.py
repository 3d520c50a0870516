"""Smoke test for the freechr_py extension module.

Build and install it first, e.g. `pip install ./crates/python`, or copy the
library produced by `cargo build -p freechr-py --features extension-module`
next to this file as `freechr_py.so`.
"""

import freechr_py

GCD = """
zero @ 0 <=> ;
subtract @ N \\ M <=> 0 < N, 0 < M, N =< M | M - N;
"""

TRANS = "trans @ (X,Y), (Y,Z) ==> X != Z | (X,Z);"


def main():
    gcd = freechr_py.Program(GCD)
    result = gcd.run("6,9")
    assert result.store == {3: 3}, result.store
    assert result.multiset == [3]
    assert gcd.labels == [1, 2, 3]
    assert all(gcd.abstract_run([6, 9], seed=s) == [3] for s in range(20))
    assert gcd.check_soundness([6, 9]) == result.steps
    assert gcd.check_embedding([6, 9]) == result.steps

    trans = freechr_py.Program(TRANS)
    hull = trans.run([("a", "b"), ("b", "c")])
    assert sorted(hull.store.values()) == [("a", "b"), ("a", "c"), ("b", "c")]
    assert hull.history == [("trans", [1, 2])]

    try:
        freechr_py.Program("bad @ <=> 1;")
    except freechr_py.ParseError as e:
        print("parse error as expected:", e)
    else:
        raise AssertionError("expected a parse error")

    print(result)
    print(gcd.enumerate_dump(), end="")
    print("ok")


if __name__ == "__main__":
    main()
