#!/usr/bin/env python3
"""Smoke test for the fss_py extension module.

Builds the cdylib with cargo, copies it next to this script as fss_py.so,
then exercises the main operations end to end on a tiny dataset.
"""
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "fss-py"], cwd=ROOT, check=True
    )
    candidates = list((ROOT / "target" / "debug").glob("libfss_py.*"))
    if not candidates:
        sys.exit("no built fss_py library found under target/debug")
    dest = Path(__file__).resolve().parent / "fss_py.so"
    shutil.copy2(candidates[0], dest)
    sys.path.insert(0, str(dest.parent))
    import fss_py

    return fss_py


def main():
    fss = build_and_import()
    circuit = [1.0e-9, 0.25e-12, 0.9e-9, 0.28e-12]

    # lossless physics: |s11|^2 + |s21|^2 = 1 everywhere
    assert fss.power_residual(circuit, 9.5) < 1e-10

    # transparency at the resonance of a matched symmetric pair
    f0 = 1.0 / (2 * math.pi * math.sqrt(1.0e-9 * 0.25e-12))
    freqs, s11, s21 = fss.simulate(
        [1.0e-9, 0.25e-12, 1.0e-9, 0.25e-12],
        9.5,
        f_start_hz=f0,
        f_stop_hz=f0 * 1.001,
        n_points=2,
    )
    assert abs(freqs[0] - f0) < 1.0
    mag21 = math.hypot(*s21[0])
    assert abs(mag21 - 1.0) < 1e-9, mag21

    # dual-number gradients agree with finite differences
    assert fss.gradient_check(circuit, 9.5, step=1e-6) < 1e-6

    # oracle responses are lossless too
    _, s11o, s21o = fss.oracle_simulate([14.825, 9.5, 14.85])
    worst = max(
        abs(a[0] ** 2 + a[1] ** 2 + b[0] ** 2 + b[1] ** 2 - 1.0)
        for a, b in zip(s11o, s21o)
    )
    assert worst < 1e-10, worst

    with tempfile.TemporaryDirectory() as tmp:
        ds_path = str(Path(tmp) / "tiny.json")
        n, residual = fss.generate_dataset(ds_path, levels=(3, 3, 3), seed=7)
        assert n == 27, n
        assert 0.0 < residual < 0.05, residual

        ckpt = str(Path(tmp) / "model.json")
        p1, p2 = fss.train(ds_path, ckpt, epochs_phase1=300, epochs_phase2=30)
        assert math.isfinite(p1) and math.isfinite(p2)

        model = fss.Model.load(ckpt)
        assert model.count_params() == 250
        c = model.predict_circuit([14.825, 9.5, 14.85])
        assert len(c) == 4 and all(v > 0 for v in c)
        freqs, s11, s21 = model.predict_response([14.825, 9.5, 14.85])
        assert len(freqs) == 201
        worst = max(
            abs(a[0] ** 2 + a[1] ** 2 + b[0] ** 2 + b[1] ** 2 - 1.0)
            for a, b in zip(s11, s21)
        )
        assert worst < 1e-10, worst

    print("smoke test passed")


if __name__ == "__main__":
    main()
