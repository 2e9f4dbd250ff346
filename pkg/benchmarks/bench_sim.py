"""Compiled vs pure-Python simulation kernel on the worked example.

    python3 benchmarks/bench_sim.py [--horizon 2e4] [--reps 4] [--repeat 3]
"""

import argparse
import timeit

import numpy as np

from mmap_rel import example, sim_oracle
from mmap_rel._sim import _fallback
from mmap_rel.model import discretize
from mmap_rel.sim_oracle import SimConfig

try:
    from mmap_rel._sim import _kernel
except ImportError:
    _kernel = None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=float, default=2e4)
    ap.add_argument("--reps", type=int, default=4)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if _kernel is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation` first")

    m = example.policy_model("model2")
    e = example.econ()
    cfg = SimConfig(args.horizon, args.reps, seed=1)
    cases = [("continuous", m, e), ("discrete", discretize(m, 0.05, "exact"), e.per_period(0.05))]
    print(f"horizon={args.horizon:g} reps={args.reps} best of {args.repeat}")
    print(f"{'mode':<12}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}  identical")
    for mode, model, econ in cases:
        fast = sim_oracle.simulate(model, econ, cfg, backend=_kernel)
        slow = sim_oracle.simulate(model, econ, cfg, backend=_fallback)
        same = np.array_equal(fast.label_counts, slow.label_counts)
        t_fast = min(timeit.repeat(lambda: sim_oracle.simulate(model, econ, cfg, backend=_kernel),
                                   number=1, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: sim_oracle.simulate(model, econ, cfg, backend=_fallback),
                                   number=1, repeat=args.repeat))
        print(f"{mode:<12}{t_fast:>12.4f}{t_slow:>12.4f}{t_slow / t_fast:>9.1f}x  {'yes' if same else 'NO'}")


if __name__ == "__main__":
    main()
