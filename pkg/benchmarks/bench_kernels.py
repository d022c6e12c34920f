"""Compare the compiled and pure-numpy kernel backends.

Run without arguments to benchmark every importable backend and print a
comparison table.  Each backend runs in a fresh subprocess because the
selection happens at import time (KSSYNC_KERNELS environment variable).

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import json
import os
import subprocess
import sys
import tempfile
import time

CONV_ORDERS = (16, 32, 64, 128)
EULER_STEPS = 2000
ESTIMATE_T = 10.0


def _median_time(fn, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    samples.sort()
    return samples[len(samples) // 2]


def run_worker(repeats: int) -> dict:
    import numpy as np

    from kssync import kernels
    from kssync.config import parse_config_text
    from kssync.experiments import run_scenario
    from kssync.spectral import DomainConfig, linear_diag, ModelParams

    rng = np.random.default_rng(0)
    theta = ModelParams(1.15, -0.05, 0.98)
    results = {"backend": kernels.BACKEND, "timings": {}}

    for K in CONV_ORDERS:
        c = rng.standard_normal(K + 1) + 1j * rng.standard_normal(K + 1)
        c[0] = c[0].real
        c *= 0.1
        # amortize per-call dispatch over a small inner loop
        results["timings"][f"convolve K={K}"] = _median_time(
            lambda c=c: [kernels.convolve_hermitian(c) for _ in range(100)], repeats
        ) / 100.0

    dom = DomainConfig(X=120.0, K=64, h=0.005, T=1.0)
    lin = linear_diag(theta, dom.omega0, 64)
    seed = rng.standard_normal(65) + 1j * rng.standard_normal(65)
    seed[0] = seed[0].real
    seed *= 0.01

    def euler():
        c = seed.copy()
        kernels.euler_run(c, lin, dom.omega0, dom.h, EULER_STEPS, 1e6)

    results["timings"][f"euler_run K=64 x{EULER_STEPS}"] = _median_time(euler, repeats)

    cfg = parse_config_text(
        f"scenario = estimate\nT = {ESTIMATE_T}\nburn_T = 20\nmu = 200\n"
    )
    with tempfile.TemporaryDirectory() as tmp:
        results["timings"][f"estimate K=M=64 T={ESTIMATE_T:g}"] = _median_time(
            lambda: run_scenario(cfg, out_dir=tmp), max(1, repeats // 3)
        )
    return results


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.worker:
        json.dump(run_worker(args.repeats), sys.stdout)
        return 0

    sys.path.insert(0, os.path.join(os.path.dirname(__file__), os.pardir, "src"))
    from kssync.kernels import available_backends

    reports = []
    for backend in available_backends():
        env = dict(os.environ, KSSYNC_KERNELS=backend)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__),
             "--worker", "--repeats", str(args.repeats)],
            env=env, capture_output=True, text=True, check=True,
        )
        reports.append(json.loads(proc.stdout))

    names = list(reports[0]["timings"])
    backends = [r["backend"] for r in reports]
    width = max(len(n) for n in names)
    header = f"{'benchmark':<{width}}" + "".join(f"  {b:>12}" for b in backends)
    if len(reports) == 2:
        header += f"  {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name in names:
        cells = [r["timings"][name] for r in reports]
        row = f"{name:<{width}}" + "".join(f"  {c * 1e3:>10.3f}ms" for c in cells)
        if len(cells) == 2:
            base = cells[backends.index("python")]
            fast = cells[backends.index("cython")]
            row += f"  {base / fast:>7.1f}x"
        print(row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
