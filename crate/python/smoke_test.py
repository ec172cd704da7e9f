"""Smoke test for the pairspace_py extension module.

Build and install first, e.g. `pip install maturin && maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import cmath
import math
import tempfile

import pairspace_py as ps


def main():
    center, rel = ps.canonicalize([0.0, 0.0, 1.0], [0.0, 0.0, -1.0])
    assert rel == [0.0, 0.0, 2.0], rel
    assert ps.canonicalize([0.0, 0.0, -1.0], [0.0, 0.0, 1.0]) == (center, rel)
    r1, r2 = ps.invert(center, rel)
    assert sorted([r1, r2]) == [[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]]
    assert ps.in_domain([1.0, 0.0, 0.0]) and not ps.in_domain([-1.0, 0.0, 0.0])

    assert abs(ps.ylm(0, 0, 0.3, 1.2) - 1 / math.sqrt(4 * math.pi)) < 1e-14
    assert abs(ps.ylm(1, 1, math.pi / 2, 0.0) + 0.34549414947) < 1e-10
    d1 = ps.wigner_small_d(1, 0.4)
    assert abs(d1[1][1] - math.cos(0.4)) < 1e-14

    report = ps.fermion_exclusion_report(1)
    assert report["forced_zero"] == [{"l": 1, "m": -1}, {"l": 1, "m": 1}], report
    assert ps.constraint_report(5)["nullspace_dim"] == 24

    assert ps.closure_defect([(0, 0)], 0.3, 1.1, 2.0) == 0.0
    assert ps.closure_defect([(1, 0)], 0.0, math.pi / 2, 0.0) > 0.1
    reports = ps.mixed_symmetry_exclusion(3, trials=10)
    assert reports[0]["closed"] and not any(r["closed"] for r in reports[1:])

    dipole = ps.WaveExpansion.gaussian_dipole()
    assert dipole.exchange_parity() == "odd"
    assert dipole.seam_residual(32) > 0.1
    w = ps.WaveExpansion([(0, 0, 0, 1.0 + 0j), (2, 1, 0, 0.5j)])
    assert w.exchange_parity() == "even"
    assert w.phase_consistency([1.0, 0.0, 0.0])["kind"] == "consistent"
    v = [0.3, -0.2, 0.7]
    assert cmath.isclose(w.evaluate_unordered(v), w.evaluate_unordered([-x for x in v]))

    rec = ps.matrix_element_compare(w, w, "r_squared")
    assert rec["abs_diff"] < 1e-8, rec
    bare = ps.matrix_element_compare(w, w, "identity", renormalize=False)
    assert abs(bare["ratio"] - 2.0) < 1e-6

    demo = ps.energy_divergence([0.5, 0.25, 0.125])
    energies = [s["kinetic_energy"] for s in demo["samples"]]
    assert energies[0] < energies[1] < energies[2], energies

    with tempfile.TemporaryDirectory() as out:
        config = '{"l_max": 2, "n_max": 1, "output_dir": "%s"}' % out
        assert ps.run_command("fermion-exclusion", config) == 0

    print("pairspace_py smoke test: ok")


if __name__ == "__main__":
    main()
