"""Disk cache for the long Monte Carlo runs used by the acceptance suite.

Runs are deterministic functions of their configuration, so a cached result
is interchangeable with a fresh one. The key covers the configuration and a
hash of every source file that influences sampling; editing any of them
invalidates the cache. Set ``SEPLAB_MC_REFRESH=1`` to force recomputation.

``python tests/mc_cache.py`` fills the cache for the whole acceptance suite.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from seplab import estimator  # noqa: E402
from seplab.ensembles import MeasureSpec, parse_family  # noqa: E402
from seplab.qrseq import QrState  # noqa: E402

CACHE_DIR = ROOT / "tests" / ".mc_cache"
SOURCES = ["_kernels.py", "_mc.py", "ensembles.py", "estimator.py", "qrseq.py", "matcore.py"]
SEED = 1


def _source_hash() -> str:
    h = hashlib.sha256()
    for name in SOURCES:
        h.update((ROOT / "src" / "seplab" / name).read_bytes())
    return h.hexdigest()[:16]


def mc_run(field: str, dims, measure: str = "hs", samples: int = 10**7, *, x_states=False,
           alpha0=None, s=None, coupled=False, stride=estimator.DEFAULT_STRIDE) -> dict:
    """Run (or load) one estimate; returns plain counts."""
    config = {"field": field, "dims": list(dims), "measure": measure, "samples": samples,
              "seed": SEED, "x_states": x_states, "alpha0": alpha0, "s": s,
              "coupled": coupled, "stride": stride, "sources": _source_hash()}
    key = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:20]
    path = CACHE_DIR / f"{key}.json"
    if path.exists() and not os.environ.get("SEPLAB_MC_REFRESH"):
        return json.loads(path.read_text())
    spec = MeasureSpec(field, tuple(dims), parse_family(measure))
    quasi = None if alpha0 is None else QrState(s, alpha0, estimator.QUASI_FIRST_INDEX)
    t0 = time.time()
    res = estimator.run(spec, samples, seed=SEED, x_states=x_states, quasi=quasi,
                        coupled=coupled, stride=stride)
    st = res.state
    out = {"config": config, "trials": st.trials, "hits": st.hits,
           "det_greater_hits": st.det_greater_hits, "spectrum_hits": st.spectrum_hits,
           "trace": [list(t) for t in st.trace], "rejected": res.rejected,
           "hs_hits": res.coupled.hs_hits if res.coupled else None,
           "seconds": round(time.time() - t0, 1)}
    CACHE_DIR.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(out, indent=1))
    return out


def state_of(run: dict) -> estimator.EstimatorState:
    return estimator.EstimatorState(run["trials"], run["hits"], run["det_greater_hits"],
                                    run["spectrum_hits"], tuple(map(tuple, run["trace"])))


# every long run the acceptance suite needs, cheapest first
RUNS = {
    "c22_hs": dict(field="C", dims=(2, 2), samples=10**7),
    "r22_hs": dict(field="R", dims=(2, 2), samples=10**7),
    "x_c22": dict(field="C", dims=(2, 2), samples=10**7, x_states=True),
    "x_r22": dict(field="R", dims=(2, 2), samples=10**7, x_states=True),
    "x_r23": dict(field="R", dims=(2, 3), samples=10**7, x_states=True),
    "x_r33": dict(field="R", dims=(3, 3), samples=10**7, x_states=True),
    "c23_induced1": dict(field="C", dims=(2, 3), measure="induced:1", samples=10**7),
    "c23_induced2": dict(field="C", dims=(2, 3), measure="induced:2", samples=10**7),
    "bures_c_a0": dict(field="C", dims=(2, 2), measure="bures", samples=2 * 10**7, alpha0=0.0, s=64),
    "bures_c_a05": dict(field="C", dims=(2, 2), measure="bures", samples=2 * 10**7, alpha0=0.5, s=64),
    "bures_r_a0": dict(field="R", dims=(2, 2), measure="bures", samples=2 * 10**7, alpha0=0.0, s=36),
    "bures_r_a05": dict(field="R", dims=(2, 2), measure="bures", samples=2 * 10**7, alpha0=0.5, s=36),
    "bures_c_pseudo": dict(field="C", dims=(2, 2), measure="bures", samples=10**7),
    "c23_hs": dict(field="C", dims=(2, 3), samples=10**8),
    "r23_hs": dict(field="R", dims=(2, 3), samples=10**8),
    "c24_hs": dict(field="C", dims=(2, 4), samples=10**8),
    "r24_hs": dict(field="R", dims=(2, 4), samples=10**8),
    "c25_hs": dict(field="C", dims=(2, 5), samples=10**8),
    "r25_hs": dict(field="R", dims=(2, 5), samples=10**8),
    "c33_hs": dict(field="C", dims=(3, 3), samples=10**8),
}


def get(name: str) -> dict:
    return mc_run(**RUNS[name])


if __name__ == "__main__":
    for name in sys.argv[1:] or RUNS:
        r = get(name)
        print(f"{name:14s} p={r['hits'] / r['trials']:.7f} n={r['trials']} {r['seconds']}s", flush=True)
