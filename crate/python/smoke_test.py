"""Smoke test for the hgpart_py extension.

Build it first, e.g. `maturin develop -m crates/python/Cargo.toml --release`.
"""

import hgpart_py as hp

H0 = "3 4\n1 2\n2 3 4\n1 3 4\n"


def main():
    h = hp.Hypergraph.from_hmetis(H0)
    assert (h.num_nodes, h.num_edges, h.num_pins) == (4, 3, 8)
    assert h.pins(1) == [1, 2, 3]

    p = hp.Partition(h, 2, [0, 0, 1, 1])
    assert p.km1 == 2 and p.cut == 2
    assert p.block_weights == [2, 2]
    assert p.is_balanced(0.0)
    p.move_node(1, 1)
    assert p.km1 == 2 and p.assignment == [0, 1, 1, 1]

    best = hp.partition_single(h, 2, epsilon=0.0, seed=1)
    assert best.km1 == 2 and best.balanced

    # a bigger instance: a ring of triangles
    n = 120
    edges = [[i, (i + 1) % n, (i + 2) % n] for i in range(n)]
    g = hp.Hypergraph(n, edges)
    single = hp.partition_single(g, 4, epsilon=0.03, seed=7, t=10)
    again = hp.vcycle(single, epsilon=0.03, seed=8, t=10)
    assert again.km1 <= single.km1
    evolved, trace = hp.evolve(g, 4, generations=10, seed=3, population=4, t=10)
    assert evolved.balanced
    assert [r[3] for r in trace] == sorted((r[3] for r in trace), reverse=True)
    assert evolved.km1 == trace[-1][3]

    a = hp.evolve(g, 4, generations=10, seed=3, population=4, t=10)[0].assignment
    assert a == evolved.assignment

    assert hp.max_block_weight(100, 4, 0.03) == 25
    assert abs(hp.block_quality(h, [0, 1]) - hp.block_quality(h, [1, 0])) < 1e-12

    try:
        hp.Hypergraph.from_hmetis("2 3\n1 9\n")
    except ValueError:
        pass
    else:
        raise AssertionError("bad pin accepted")

    print("smoke test ok: km1", best.km1, single.km1, again.km1, evolved.km1)


if __name__ == "__main__":
    main()
