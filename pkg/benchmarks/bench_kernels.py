"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot inner loops (implicit diode solve and battery-current
fixed point) by direct calls to both backends, then the whole 24 h default
simulation under each backend in a subprocess (backend selection happens at
import time, so fresh interpreters are needed for the end-to-end numbers).

Run from the repository root:

    python benchmarks/bench_kernels.py
"""

import os
import subprocess
import sys
import time

from pvbatsim._kernels import _pure

try:
    from pvbatsim._kernels import _core
except ImportError:
    _core = None

VT = 1.2024  # thermal voltage of the generic panel at 25 C


def bench(label, fn, n):
    t0 = time.perf_counter()
    for _ in range(n):
        fn()
    per_call = (time.perf_counter() - t0) / n
    print(f"  {label:<22} {per_call * 1e6:9.2f} us/call")
    return per_call


def bench_backend(name, mod):
    print(f"{name}:")
    diode = bench(
        "diode solve", lambda: mod.solve_diode_current(17.7, 4.95, 7e-8, 0.16, 200.0, VT), 20000
    )
    battery = bench(
        "battery fixed point",
        lambda: mod.battery_current_for_power(250.0, 0.6, 100.0, 0.0, 24.0, 1.0, 1.3),
        20000,
    )
    bench("open-circuit voltage", lambda: mod.open_circuit_voltage(4.95, 7e-8, 200.0, VT), 20000)
    return diode, battery


def bench_full_run(pure):
    sys.stdout.flush()  # keep subprocess output ordered with ours
    env = dict(os.environ)
    if pure:
        env["PVBATSIM_PURE"] = "1"
    else:
        env.pop("PVBATSIM_PURE", None)
    code = (
        "import time; from pvbatsim.config import build_sim_config; "
        "from pvbatsim import engine, _kernels; "
        "cfg = build_sim_config(); t0 = time.perf_counter(); "
        "records, ledger = engine.run(cfg); "
        "print(f'{_kernels.backend_name()}: {time.perf_counter() - t0:.2f}s "
        "for {len(records)} steps')"
    )
    subprocess.run([sys.executable, "-c", code], env=env, check=True)


def main():
    print("== kernel micro-benchmarks ==")
    pure_diode, pure_bat = bench_backend("pure python", _pure)
    if _core is None:
        print("compiled backend not built; install with the extension to compare")
        return
    core_diode, core_bat = bench_backend("cython", _core)
    print(f"speedup: diode x{pure_diode / core_diode:.1f}, "
          f"battery x{pure_bat / core_bat:.1f}")
    print()
    print("== full 24 h default simulation (fresh interpreter per backend) ==")
    bench_full_run(pure=True)
    bench_full_run(pure=False)


if __name__ == "__main__":
    main()
