"""Mergeable Monte Carlo tallies, Wilson intervals and the block-parallel runner.

Work is cut into fixed blocks of :data:`BLOCK` samples. A pseudorandom block
``b`` draws from stream ``(seed, b)``; a quasirandom block covers a
contiguous range of point indices. Block outcomes are reduced in block order,
so the totals and every trace checkpoint depend only on the configuration,
never on the number of worker threads.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from . import _mc
from .criteria import Verdict
from .ensembles import MeasureSpec, Pseudo, check_x_spec, kernel_params, normals_per_sample
from .errors import InvalidConfig, StreamExhausted, Unsupported
from .qrseq import QrState

BLOCK = 1_000_000
DEFAULT_STRIDE = 5_000_000
QUASI_FIRST_INDEX = 1


def _z_for(level: float) -> float:
    if not 0.0 < level < 1.0:
        raise ValueError("confidence level must lie in (0, 1)")
    return NormalDist().inv_cdf(0.5 + level / 2.0)


def wilson_interval(trials: int, hits: int, level: float = 0.95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("need at least one trial")
    z = _z_for(level)
    p = hits / trials
    z2n = z * z / trials
    centre = (p + z2n / 2.0) / (1.0 + z2n)
    half = z / (1.0 + z2n) * math.sqrt(p * (1.0 - p) / trials + z2n / (4.0 * trials))
    lo = 0.0 if hits == 0 else max(0.0, centre - half)
    hi = 1.0 if hits == trials else min(1.0, centre + half)
    return lo, hi


@dataclass(frozen=True)
class EstimatorState:
    """PPT tallies; ``det_greater_hits`` and ``spectrum_hits`` count PPT samples only."""

    trials: int = 0
    hits: int = 0
    det_greater_hits: int = 0
    spectrum_hits: int = 0
    trace: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not 0 <= self.spectrum_hits <= self.hits <= self.trials:
            raise ValueError("need 0 <= spectrum_hits <= hits <= trials")
        if not 0 <= self.det_greater_hits <= self.hits:
            raise ValueError("need 0 <= det_greater_hits <= hits")

    @property
    def p_hat(self) -> float:
        return self.hits / self.trials if self.trials else math.nan

    @property
    def det_greater_fraction(self) -> float:
        return self.det_greater_hits / self.hits if self.hits else math.nan

    @property
    def spectrum_fraction(self) -> float:
        return self.spectrum_hits / self.hits if self.hits else math.nan

    def update(self, verdict: Verdict) -> "EstimatorState":
        ppt = int(verdict.ppt)
        return replace(
            self,
            trials=self.trials + 1,
            hits=self.hits + ppt,
            det_greater_hits=self.det_greater_hits + (ppt and int(verdict.det_pt_greater)),
            spectrum_hits=self.spectrum_hits + (ppt and int(verdict.spectrum_separable)),
        )

    def add(self, trials: int, hits: int, det_greater: int = 0, spectrum: int = 0) -> "EstimatorState":
        return replace(
            self,
            trials=self.trials + trials,
            hits=self.hits + hits,
            det_greater_hits=self.det_greater_hits + det_greater,
            spectrum_hits=self.spectrum_hits + spectrum,
        )

    def checkpoint(self) -> "EstimatorState":
        return replace(self, trace=self.trace + ((self.trials, self.hits),))

    def merge(self, other: "EstimatorState") -> "EstimatorState":
        """Fieldwise sum; a trace survives only when the other side has none."""
        trace = () if self.trace and other.trace else self.trace or other.trace
        return EstimatorState(
            self.trials + other.trials,
            self.hits + other.hits,
            self.det_greater_hits + other.det_greater_hits,
            self.spectrum_hits + other.spectrum_hits,
            trace,
        )

    def wilson_ci(self, level: float = 0.95) -> tuple[float, float]:
        return wilson_interval(self.trials, self.hits, level)

    def z_score(self, value) -> float:
        """Standardised distance of ``p_hat`` from ``value`` (binomial sigma at ``value``)."""
        v = float(value)
        sigma = math.sqrt(v * (1.0 - v) / self.trials)
        return (self.p_hat - v) / sigma if sigma > 0 else math.inf

    def trace_rows(self, level: float = 0.95):
        for trials, hits in self.trace:
            lo, hi = wilson_interval(trials, hits, level)
            yield trials, hits, hits / trials, lo, hi

    def trace_csv(self, level: float = 0.95) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trials", "hits", "p_hat", "ci_lo", "ci_hi"])
        for trials, hits, p, lo, hi in self.trace_rows(level):
            w.writerow([trials, hits, repr(p), repr(lo), repr(hi)])
        return buf.getvalue()


def update(state: EstimatorState, verdict: Verdict) -> EstimatorState:
    return state.update(verdict)


def merge(a: EstimatorState, b: EstimatorState) -> EstimatorState:
    return a.merge(b)


def wilson_ci(state: EstimatorState, level: float = 0.95) -> tuple[float, float]:
    return state.wilson_ci(level)


@dataclass(frozen=True)
class CoupledState:
    """HS and mixed-measure PPT counts computed from one shared Ginibre draw."""

    trials: int = 0
    hs_hits: int = 0
    bures_hits: int = 0

    def __post_init__(self):
        if not (0 <= self.hs_hits <= self.trials and 0 <= self.bures_hits <= self.trials):
            raise ValueError("hit counts must lie in [0, trials]")

    def merge(self, other: "CoupledState") -> "CoupledState":
        return CoupledState(self.trials + other.trials, self.hs_hits + other.hs_hits,
                            self.bures_hits + other.bures_hits)


def corrected_bures(coupled: CoupledState, hs_truth=Fraction(8, 33)) -> float:
    """Bures estimate nudged by half the HS control-variate ratio.

    ``b_hat * (1 + hs_truth / hs_hat) / 2``: the HS side shares only the
    Ginibre block with the Bures side (the unitary is independent), hence
    the averaging with 1.
    """
    if coupled.hs_hits == 0:
        raise ZeroDivisionError("no HS hits: correction factor undefined")
    b_hat = Fraction(coupled.bures_hits, coupled.trials)
    factor = Fraction(hs_truth) * coupled.trials / coupled.hs_hits
    return float(b_hat * (1 + factor) / 2)


# --------------------------------------------------------------------------
# block-parallel runner


@dataclass(frozen=True)
class RunResult:
    state: EstimatorState
    coupled: CoupledState | None = None
    points: int = 0
    rejected: int = 0


@dataclass(frozen=True)
class _Job:
    ip: np.ndarray = field(repr=False)
    x: float
    seed: int
    x_states: bool
    quasi: QrState | None

    def run_block(self, block: int, pieces: list[tuple[int, int]]) -> list[np.ndarray]:
        """Tallies for each ``[lo, hi)`` piece of ``block`` (block-relative offsets)."""
        empty = np.zeros(1, dtype=np.uint64)
        out = []
        if self.quasi is not None:
            hi_w, lo_w, off = self.quasi.words
            base = self.quasi.n + block * BLOCK
            for lo, hi in pieces:
                out.append(_mc.run_block(self.ip, self.x, np.uint64(0), base + lo, hi - lo,
                                         hi_w, lo_w, np.uint64(off)))
            return out
        key = np.uint64(Pseudo(self.seed, block).key)
        ctr = 0
        for lo, hi in pieces:
            start = ctr if self.x_states else lo
            t = _mc.run_block(self.ip, self.x, key, start, hi - lo, empty, empty, np.uint64(0))
            ctr = int(np.uint64(t[_mc.T_COUNTER]))
            out.append(t)
        return out


def _pieces(samples: int, stride: int) -> list[tuple[int, list[tuple[int, int]]]]:
    cuts = set(range(0, samples, BLOCK)) | set(range(0, samples, stride)) | {samples}
    cuts = sorted(cuts)
    blocks: dict[int, list[tuple[int, int]]] = {}
    for lo, hi in zip(cuts, cuts[1:]):
        b = lo // BLOCK
        blocks.setdefault(b, []).append((lo - b * BLOCK, hi - b * BLOCK))
    return sorted(blocks.items())


def default_threads() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return os.cpu_count() or 1


def run(
    spec: MeasureSpec,
    samples: int,
    *,
    seed: int = 0,
    threads: int | None = None,
    stride: int = DEFAULT_STRIDE,
    x_states: bool = False,
    quasi: QrState | None = None,
    coupled: bool = False,
) -> RunResult:
    """Estimate PPT probabilities for ``spec`` from ``samples`` draws (or quasi points).

    With ``quasi`` set, points ``quasi.n, quasi.n + 1, ...`` are used;
    points with a zero coordinate are skipped and reported in ``rejected``.
    ``coupled`` additionally tallies the HS verdict of the shared Ginibre
    block and requires a mixing family.
    """
    samples = int(samples)
    if samples < 1:
        raise InvalidConfig("samples must be >= 1")
    if stride < 1:
        raise InvalidConfig("trace stride must be >= 1")
    if spec.field == "H":
        raise Unsupported("partial transposition of quaternionic states is not defined here")
    if coupled and not spec.mixes:
        raise InvalidConfig("coupled runs need a Bures or interpolated measure")
    if x_states and (quasi is not None or coupled):
        raise InvalidConfig("X states are sampled from pseudorandom streams only")
    if quasi is not None and normals_per_sample(spec) > quasi.s:
        raise StreamExhausted(f"{spec} needs {normals_per_sample(spec)} coordinates, s={quasi.s}")
    if x_states:
        check_x_spec(spec)

    ip, x = kernel_params(spec, quasi=quasi is not None, coupled=coupled, x_states=x_states)
    job = _Job(ip, x, int(seed), x_states, quasi)
    work = _pieces(samples, stride)
    nthreads = threads or default_threads()
    if nthreads == 1:
        results = [job.run_block(b, p) for b, p in work]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            results = list(pool.map(lambda bp: job.run_block(*bp), work))

    state = EstimatorState()
    pair = CoupledState()
    points = rejected = 0
    for (b, pieces), tallies in zip(work, results):
        for (lo, hi), t in zip(pieces, tallies):
            state = state.add(int(t[_mc.T_TRIALS]), int(t[_mc.T_PPT]),
                              int(t[_mc.T_DET_GREATER]), int(t[_mc.T_SPECTRUM]))
            pair = pair.merge(CoupledState(int(t[_mc.T_TRIALS]), int(t[_mc.T_HS_PPT]),
                                           int(t[_mc.T_PPT])))
            points += hi - lo
            rejected += int(t[_mc.T_REJECTED])
            done = b * BLOCK + hi
            if done % stride == 0 or done == samples:
                if state.trials:
                    state = state.checkpoint()
    return RunResult(state, pair if coupled else None, points, rejected)

