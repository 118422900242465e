"""Smoke test for the starsl extension module.

Build and install first:
    pip install maturin
    pip install --no-build-isolation -e crates/python
"""

import math

import starsl

GRID = "generic:0.3:12.3:40"


def main():
    cfg = starsl.Config.example()
    assert cfg.lengths == [1.0, 1.3, 0.9]
    assert len(cfg.chords) == 3

    z = 2.7 + 0.1j
    nonlocal_, center, outer = cfg.blocks(z)
    assert abs(nonlocal_ + center + outer - cfg.phi(z)) < 1e-12 * (1 + abs(cfg.phi(z)))

    samples = cfg.sample(GRID)
    assert len(samples) == 40
    again = starsl.Samples.from_json(samples.to_json())
    assert again.values == samples.values

    topo = starsl.recover_topology(cfg, samples)
    assert topo["status"] == "ok"
    for a, b in zip(topo["angles"], [2.0, 2.2, 2 * math.pi - 4.2]):
        assert abs(a - b) < 1e-6, (a, b)

    pot = starsl.recover_potential(cfg, samples)
    assert pot["status"] == "ok"
    assert abs(complex(*pot["coefficients"][0][0]) - 0.3) < 1e-8

    two = starsl.Config('{"edges": [{"length": 3.141592653589793}, {"length": 3.141592653589793}], '
                        '"chords": [1.0, 1.0], "mode": "normalized", "truncation": 2}')
    eig = starsl.oracle_spectrum(two, 0.02, 4)
    assert abs(eig[0] - 0.25) < 1e-4 and abs(eig[1] - 1.0) < 1e-3, eig

    report = starsl.verify()
    assert report["failed"] == 0, report

    try:
        starsl.Config('{"edges": [{"length": 1.0}]}')
    except starsl.StarslError:
        pass
    else:
        raise AssertionError("single edge accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
