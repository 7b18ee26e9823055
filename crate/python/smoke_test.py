"""Quick check of the compiled extension.

Build it first (see the README), then run
    PYTHONPATH=<dir holding dualpath.so> python3 python/smoke_test.py
"""

import math

import dualpath


def close(a, b, tol=1e-10):
    return len(a) == len(b) and all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    path = dualpath.solve_path([0.0, 1.0, 3.0], "fl1d")
    assert path.termination == "completed", path.termination
    assert close(path.lambdas, [5.0 / 3.0, 1.0]), path.lambdas
    kinds = [k[1] for k in path.knots()]
    assert kinds == ["hit", "hit"], kinds
    assert close(path.primal_at(1.0), [1.0, 1.0, 2.0])
    assert close(path.primal_at(0.0), [0.0, 1.0, 3.0])
    assert close(path.primal_at(10.0), [4.0 / 3.0] * 3)

    # order 0 trend filtering is the 1d fused lasso
    tf = dualpath.solve_path([0.0, 1.0, 3.0], "tf", order=0)
    assert close(tf.lambdas, path.lambdas)

    y = [math.sin(i / 3.0) + 0.1 * (-1) ** i for i in range(30)]
    cubic = dualpath.solve_path(y, "tf", order=3)
    assert cubic.termination == "completed"
    assert close(cubic.primal_at(0.0), y, 1e-8)

    edges = [(0, 1), (1, 2), (2, 3), (0, 3)]
    sfl = dualpath.solve_path([1.0, -2.0, 0.5, 3.0], "sfl", edges=edges, alpha=0.5)
    assert sfl.lambdas == sorted(sfl.lambdas, reverse=True)
    assert sfl.df_at(1e9) == 0

    x = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]]
    gen = dualpath.solve_path([0.0, 1.0, 3.0, 4.0], "fl1d", x=x)
    assert gen.termination == "completed"

    try:
        dualpath.solve_path([1.0, 2.0], "flgraph")
    except ValueError as e:
        assert "edges" in str(e)
    else:
        raise AssertionError("missing edges accepted")

    print("smoke test ok:", path)


if __name__ == "__main__":
    main()
