"""Smoke test for the cayley_klein extension module.

Build and install first:  pip install --no-build-isolation crates/python
"""

import cmath
import math
import os
import tempfile

import cayley_klein as ck


def close(a, b, tol=1e-12):
    return abs(a - b) <= tol * max(1.0, abs(b))


def matmul(a, b):
    return [[sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def main():
    assert ck.parse_signature("d,1,i") == "d,1,i"
    try:
        ck.parse_signature("1,x")
    except ValueError as e:
        assert "x" in str(e)
    else:
        raise AssertionError("bad token accepted")

    for u in (-4.0, -1e-6, 0.0, 0.3, 9.0):
        c, s, g = ck.kernels(u)
        assert close(c * c + u * s * s, 1.0)
        assert close(c, 1.0 - u * g)

    # Euclidean plane rotation block and its inverse.
    r = ck.rotation_block("1,1", 1, [0.7])
    assert close(r[1][1], math.cos(0.7)) and close(r[2][1], math.sin(0.7))
    prod = matmul(r, ck.rotation_block("1,1", 1, [-0.7]))
    assert all(close(prod[i][j], float(i == j)) for i in range(3) for j in range(3))

    flat = [0.3, -0.2, 0.5, 0.1, 0.4, -0.6]
    m = ck.group_element("1,i,d", flat)
    back = ck.group_element("1,i,d", ck.factorize("1,i,d", m))
    assert all(close(back[i][j], m[i][j], 1e-8) for i in range(4) for j in range(4))

    assert close(ck.density("1,1", [0.5, 0.0, 1.0]), math.sin(0.5) / 0.5)
    assert len(ck.casimir("d,1")) == 3

    cls = ck.classify_orbit("1,1", [0.0, 0.0, 0.0])
    assert cls["radius_kind"] == "zero" and cls["degeneracy"] == "point"
    cls = ck.classify_orbit("i,1", [1.0, 0.0, 0.0])
    assert cls["radius_kind"] == "imaginary"
    assert close(ck.orbit_invariant("1,1", [1.0, 2.0, 2.0]), 9.0)

    x = [0.3, -1.1, 0.8]
    t = ck.transported("d,1", [0.2, 0.4, -0.3], x)
    assert len(t) == 3 and len(ck.dcoeffs("d,1", [0.2, 0.4, -0.3], x)) == 2

    f = lambda q: complex(math.cos(q[0]), 0.2 * q[0])
    v = ck.heisenberg_apply(1.5, "plus", (0.4, -0.2), 0.3, f, 0.9)
    expected = cmath.exp(1j * 1.5 * (-0.2 - 0.4 * 0.9)) * f([0.9 - 0.3])
    assert abs(v - expected) < 1e-13

    w = ck.omega_apply("d,d", 1.5, "plus", [0.4, -0.2], [0.3], f, [0.9])
    assert abs(w - expected) < 1e-12

    report = ck.contraction_check("d,1", seed=3)
    assert report["pass"] and {q["name"] for q in report["quantities"]} >= {"rotation_block", "group_product"}

    with tempfile.TemporaryDirectory() as d:
        out = os.path.join(d, "table.csv")
        assert ck.run_cli(["orbit-table", "--n", "3", "--format", "csv", "-o", out]) == 0
        with open(out) as fh:
            assert fh.readline().startswith("subgroup")
    assert ck.run_cli(["verify", "--signature", "q,1"]) == 2

    print("smoke test passed")


if __name__ == "__main__":
    main()
