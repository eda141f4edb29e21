"""Smoke test for the pycavitybudget extension module.

Build and install with `maturin develop -m crates/python/Cargo.toml`, or
put a built `pycavitybudget` shared library on PYTHONPATH, then run this
script.
"""

import math
import tempfile
from pathlib import Path

import pycavitybudget as cb


def main():
    cav = cb.Cavity()
    assert abs(cav.finesse / 3.9e5 - 1) < 0.03, cav.finesse
    assert abs(cav.fwhm / 4020 - 1) < 0.05, cav.fwhm
    assert abs(cav.displacement_for_frequency(50e6) - 2.4559e-8) < 1e-11

    assert abs(cb.sql_asd(0.01, 100.0) / 4.62e-19 - 1) < 0.005
    pc = cav.power_for_sql(100.0)
    q = cb.quantum_noise(cav, pc, [10.0, 100.0, 1000.0])
    assert abs(q["total"][1] / q["sql"][1] - 1) < 1e-9
    assert all(t >= s for t, s in zip(q["total"], q["sql"]))

    try:
        cb.Cavity(length_m=-1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("negative length accepted")

    assert "paper_default" in cb.builtin_scenarios()
    sc = cb.Scenario.load("paper_default")
    freqs, traces, summary = sc.run_budget()
    assert len(freqs) == 1000 and "total" in traces
    assert 1e-15 <= summary["total_at_100hz"] <= 4e-15, summary
    assert summary["vco_margin_ratio"] >= 20

    _, (mag, _), susp = sc.run_suspension_tf()
    assert susp["all_modes_below_10hz"]
    assert all(math.isfinite(v) for v in mag)

    _, iso, iso_summary = sc.run_isolation()
    assert iso_summary["reduction_ratio"] >= 5
    assert set(iso) == {"ground", "passive", "active"}

    sc.set_grid(1.0, 1000.0, 50)
    assert sc.run_quantum()["sql_asd_at_100hz"] > 0
    with tempfile.TemporaryDirectory() as d:
        files = sc.write("quantum", Path(d))
        assert any(str(f).endswith("quantum.csv") for f in files)

    print("smoke test passed")


if __name__ == "__main__":
    main()
