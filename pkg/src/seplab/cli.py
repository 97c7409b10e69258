"""Command-line entry point: ``seplab {estimate,prob,chi,volumes,qrtest}``.

Exit codes: 0 success, 2 invalid configuration, 3 numerical non-convergence,
4 registry disagreement (``|z| > 5``) under ``--assert-registry``.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__, analytic, volumes
from .ensembles import HS, Induced, MeasureSpec, parse_family
from .errors import InvalidConfig, InvalidSpec, NonConvergence, StreamExhausted, Unsupported
from .estimator import DEFAULT_STRIDE, QUASI_FIRST_INDEX, corrected_bures, default_threads, run
from .qrseq import QrState, solve_phi

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGENCE, EXIT_REGISTRY = 0, 2, 3, 4
REGISTRY_Z_LIMIT = 5.0
BURES_QUASI_DIM = {"C": 64, "R": 36}
BURES_REFERENCE = {"C": 0.07331, "R": 0.15709}


@dataclass(frozen=True)
class RunConfig:
    command: str
    field: str | None = None
    dims: tuple[int, int] | None = None
    measure: str | None = None
    x_states: bool = False
    samples: int | None = None
    seed: int = 0
    threads: int = 1
    alpha0: float | None = None
    output: str | None = None
    format: str = "json"

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        if self.dims is not None:
            out["dims"] = list(self.dims)
        return out


def count(text: str) -> int:
    """Sample counts such as ``1e7``, ``2.5e6`` or ``10000000``."""
    try:
        value = Fraction(text.replace("_", ""))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a count: {text!r}") from None
    if value.denominator != 1 or value < 1:
        raise argparse.ArgumentTypeError(f"count must be a positive integer: {text!r}")
    return int(value)


def dims(text: str) -> tuple[int, int]:
    try:
        a, b = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must look like 2x3, got {text!r}") from None
    return a, b


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False) + "\n"


def _stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _report_header(config: RunConfig) -> dict:
    return {"config": config.to_json(), "version": __version__, "timestamp": _stamp()}


# --------------------------------------------------------------------------
# estimate


def registry_value(spec: MeasureSpec, x_states: bool):
    """Reference probability for ``spec`` as ``(value, label)`` or ``None``."""
    ma, mb = sorted(spec.dims)
    if isinstance(spec.family, (HS, Induced)):
        family = "X-HS" if x_states else "HS"
        rec = volumes.lookup(spec.field, ma, mb, family, spec.k)
        if rec is not None:
            return float(rec.value), rec.value_str()
        if not x_states and (ma, mb) == (2, 2) and spec.field in ("R", "C"):
            exact = analytic.induced_closed_form(spec.field, spec.k)
            return float(exact), str(exact)
    return None


def cmd_estimate(args) -> int:
    spec = MeasureSpec(args.field, args.dims, parse_family(args.measure))
    threads = args.threads or default_threads()
    config = RunConfig("estimate", spec.field, spec.dims, str(spec.family), args.x_states,
                       args.samples, args.seed, threads, args.alpha0, args.output, args.format)
    quasi = None
    if args.alpha0 is not None:
        s = args.quasi_dim or BURES_QUASI_DIM.get(spec.field, 64)
        quasi = QrState(s, args.alpha0, QUASI_FIRST_INDEX)
    result = run(spec, args.samples, seed=args.seed, threads=threads, stride=args.stride,
                 x_states=args.x_states, quasi=quasi, coupled=args.coupled)
    st = result.state
    lo, hi = st.wilson_ci()
    ref = registry_value(spec, args.x_states)
    report = _report_header(config)
    report.update({
        "p_hat": st.p_hat,
        "ci": [lo, hi],
        "n": st.trials,
        "hits": st.hits,
        "splits": {"det_greater": st.det_greater_fraction if st.hits else None,
                   "spectrum": st.spectrum_fraction if st.hits else None},
        "registry": ({"value": ref[0], "exact": ref[1], "z": st.z_score(ref[0])}
                     if ref else {"value": None, "z": None}),
    })
    if quasi is not None:
        report["quasi"] = {"s": quasi.s, "alpha0": quasi.alpha0,
                           "first_index": QUASI_FIRST_INDEX, "skipped_points": result.rejected}
    if result.coupled is not None:
        hs_truth = Fraction(8, 33) if spec.field == "C" else Fraction(29, 64)
        report["coupled"] = {
            "hs_hits": result.coupled.hs_hits,
            "corrected": corrected_bures(result.coupled, hs_truth) if result.coupled.hs_hits else None,
        }
    notes = []
    if spec.ginibre_cols < spec.n:
        notes.append("rank-deficient ensemble: the exact PPT probability can vanish while the "
                     "1e-10 positivity tolerance still admits a small number of hits")
    report["notes"] = notes
    if args.trace:
        Path(args.trace).write_text(st.trace_csv())

    if args.format == "csv":
        _emit(st.trace_csv(), args.output)
    else:
        _emit(_dumps(report), args.output)
    if args.assert_registry and ref is not None and abs(st.z_score(ref[0])) > REGISTRY_Z_LIMIT:
        print(f"registry disagreement: z = {st.z_score(ref[0]):.2f}", file=sys.stderr)
        return EXIT_REGISTRY
    return EXIT_OK


# --------------------------------------------------------------------------
# prob


def _parse_rule(text: str, k_default: int):
    name, _, arg = text.partition(":")
    k = int(arg) if arg else k_default
    if name == "induced":
        return "induced", k
    if name == "sqrtx":
        return "sqrtx", k
    raise InvalidConfig(f"unknown rule {text!r}")


def cmd_prob(args) -> int:
    rule, k = _parse_rule(args.rule, args.k)
    d = args.d
    if d % 2:
        raise Unsupported(f"odd d={d}: no exact pipeline (use the master formula numerically)")
    if k < 0:
        raise InvalidConfig("k must be >= 0")
    chi = analytic.chi_general(d // 2, k)
    lines = {}
    if rule == "induced":
        exact = analytic.sep_prob_exact(d // 2, k)
        quad = analytic.sep_prob_quadrature(chi, d, analytic.Induced(k))
        lines["exact"] = f"{exact} = {float(exact)!r}"
        lines["quadrature"] = repr(quad)
        lines["difference"] = f"{abs(float(exact) - quad):.3e}"
        value = {"exact": str(exact), "exact_float": float(exact), "quadrature": quad}
    else:
        quad = analytic.sep_prob_quadrature(chi, d, analytic.OpMonotoneSqrt(k))
        closed = analytic.sqrtx_closed_form(d, k)
        if closed:
            lines["closed form"] = f"{closed[0]} ~= {closed[1]!r}"
        lines["quadrature"] = repr(quad)
        if closed:
            lines["difference"] = f"{abs(closed[1] - quad):.3e}"
        value = {"closed_form": closed[0] if closed else None,
                 "closed_form_float": closed[1] if closed else None, "quadrature": quad}
    if args.format == "json":
        report = _report_header(RunConfig("prob", output=args.output, format="json"))
        report.update({"d": d, "k": k, "rule": rule, **value})
        _emit(_dumps(report), args.output)
    else:
        width = max(len(key) for key in lines)
        _emit("".join(f"{key:<{width}}  {val}\n" for key, val in lines.items()), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# chi


def _poly_text(coeffs: list[Fraction]) -> str:
    """``z^a*(c0 + c1*z + ...)/den`` with integer ``c_i``."""
    low = next(i for i, c in enumerate(coeffs) if c != 0)
    body = coeffs[low:]
    den = math.lcm(*(c.denominator for c in body))
    ints = [int(c * den) for c in body]
    terms = []
    for i, c in enumerate(ints):
        if c == 0:
            continue
        mono = "" if i == 0 else ("z" if i == 1 else f"z^{i}")
        mag = abs(c)
        factor = mono if (mag == 1 and mono) else (f"{mag}*{mono}" if mono else f"{mag}")
        sign = "-" if c < 0 else "+"
        terms.append((sign, factor))
    text = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    text += "".join(f" {s} {f}" for s, f in terms[1:])
    prefix = "" if low == 0 else ("z*" if low == 1 else f"z^{low}*")
    out = f"{prefix}({text})" if len(terms) > 1 or prefix else text
    return out if den == 1 else f"{out}/{den}"


def chi_check(d: int, k: int, points: int = 9) -> dict:
    """Compare every available exact construction of the separability function."""
    general = analytic.chi_general(d // 2, k)
    zs = [Fraction(i, points - 1) for i in range(points)]
    routes = {"general": [general(z) for z in zs],
              "double_sum": [analytic.chi_double_sum(d, k, z) for z in zs]}
    if d in (2, 4, 6):
        routes["closed"] = [analytic.chi_closed(d, k)(z) for z in zs]
    ref = routes["general"]
    agree = all(vals == ref for vals in routes.values())
    return {"routes": sorted(routes), "points": points, "status": "exact" if agree else "MISMATCH"}


def cmd_chi(args) -> int:
    d, k = args.d, args.k
    if d % 2:
        raise Unsupported(f"odd d={d} has no polynomial form")
    if k < 0:
        raise InvalidConfig("k must be >= 0")
    poly = analytic.chi_general(d // 2, k)
    coeffs = poly.coefficients()
    out = [f"chi_{d},{k}(z) = {_poly_text(coeffs)}    (z = eps^2)\n",
           "coefficients: " + ", ".join(str(c) for c in coeffs) + "\n"]
    if args.check:
        res = chi_check(d, k)
        out.append(f"check: {res['status']} ({' = '.join(res['routes'])} at {res['points']} rational points)\n")
    if args.curve:
        eps = np.linspace(0.0, 1.0, args.curve_points)
        with open(args.curve, "w") as fh:
            fh.write("eps,chi\n")
            for e in eps:
                fh.write(f"{e!r},{poly.of_eps(float(e))!r}\n")
    _emit("".join(out), args.output)
    return EXIT_OK if not args.check or res["status"] == "exact" else EXIT_NONCONVERGENCE


# --------------------------------------------------------------------------
# volumes


def cmd_volumes(args) -> int:
    sizes = args.N or [4, 6, 8, 10]
    hs = {"R": volumes.vol_hs_real, "C": volumes.vol_hs_complex}
    out = ["field  N   measure   volume\n"]
    for N in sizes:
        for field in ("R", "C", "H"):
            out.append(f"{field:<6} {N:<3} Lebesgue  {volumes.lebesgue_volume(field, N)}\n")
            if field in hs:
                out.append(f"{field:<6} {N:<3} HS        {hs[field](N)}\n")
    out.append("\nseparable volumes (Lebesgue volume x probability)\n")
    for rec in volumes.registry():
        field, ma, mb = rec.system
        if rec.measure[0] != "HS" or ma * mb not in sizes:
            continue
        vol = volumes.separable_volume(rec.system, rec)
        out.append(f"{field} {ma}x{mb}  p = {rec.value_str():<14} [{rec.status}]  {vol}\n")
    _emit("".join(out), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# qrtest


def _discrepancy_proxy(pts: np.ndarray) -> float:
    """Error in integrating ``prod_j (1 + (x_j - 1/2))``, whose exact mean is 1."""
    return float(abs(np.mean(np.prod(0.5 + pts, axis=1)) - 1.0))


def cmd_qrtest(args) -> int:
    if args.bures:
        return _qrtest_bures(args)
    s = args.s
    state = QrState(s, args.alpha0 if args.alpha0 is not None else 0.5, QUASI_FIRST_INDEX)
    pts = state.points(args.points)
    rng = np.random.default_rng(args.seed)
    out = [
        f"phi_{s} = {solve_phi(s)!r}\n",
        f"alpha = {', '.join(f'{a:.10f}' for a in state.alpha[:min(s, 6)])}{', ...' if s > 6 else ''}\n",
        f"discrepancy proxy (quasi, n={args.points}) = {_discrepancy_proxy(pts):.3e}\n",
        f"discrepancy proxy (pseudo, n={args.points}) = "
        f"{_discrepancy_proxy(rng.random((args.points, s))):.3e}\n",
    ]
    _emit("".join(out), args.output)
    return EXIT_OK


def _qrtest_bures(args) -> int:
    field = args.field
    s = args.s if args.s_given else BURES_QUASI_DIM[field]
    spec = MeasureSpec(field, (2, 2), parse_family("bures"))
    threads = args.threads or default_threads()
    runs = {}
    for alpha0 in (0.0, 0.5):
        res = run(spec, args.points, threads=threads, stride=args.stride,
                  quasi=QrState(s, alpha0, QUASI_FIRST_INDEX))
        runs[alpha0] = res
        if args.trace:
            Path(f"{args.trace}.alpha0-{alpha0}.csv").write_text(res.state.trace_csv())
    config = RunConfig("qrtest", field, (2, 2), "bures", False, args.points, 0, threads,
                       None, args.output, "json")
    report = _report_header(config)
    report.update({
        "s": s,
        "reference": BURES_REFERENCE[field],
        "runs": [{"alpha0": a, "p_hat": r.state.p_hat, "n": r.state.trials, "hits": r.state.hits,
                  "ci": list(r.state.wilson_ci()), "skipped_points": r.rejected,
                  "trace": [list(t) for t in r.state.trace]} for a, r in runs.items()],
        "paired_difference": runs[0.0].state.p_hat - runs[0.5].state.p_hat,
    })
    _emit(_dumps(report), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="seplab", description="Separability probability toolkit.")
    p.add_argument("--version", action="version", version=f"seplab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--output", "-o", help="write the report here instead of stdout")

    e = sub.add_parser("estimate", help="Monte Carlo PPT probability")
    e.add_argument("--field", choices=["R", "C", "H"], default="C")
    e.add_argument("--dims", type=dims, default=(2, 2))
    e.add_argument("--measure", default="hs", help="hs | bures | induced:K | interpolated:X")
    e.add_argument("--samples", type=count, default=count("1e6"))
    e.add_argument("--seed", type=count_or_zero, default=0)
    e.add_argument("--threads", type=int, default=0, help="0 = all available cores")
    e.add_argument("--x-states", action="store_true")
    e.add_argument("--alpha0", type=_fraction_float, default=None,
                   help="drive with quasirandom points at this offset instead of a seed")
    e.add_argument("--quasi-dim", type=int, default=None)
    e.add_argument("--coupled", action="store_true", help="also tally HS from the shared Ginibre block")
    e.add_argument("--stride", type=count, default=DEFAULT_STRIDE)
    e.add_argument("--trace", help="CSV path for convergence checkpoints")
    e.add_argument("--format", choices=["json", "csv"], default="json")
    e.add_argument("--assert-registry", action="store_true")
    common(e)
    e.set_defaults(func=cmd_estimate)

    pr = sub.add_parser("prob", help="exact and quadrature separability probabilities")
    pr.add_argument("--d", type=int, required=True)
    pr.add_argument("--k", type=int, default=0)
    pr.add_argument("--rule", default="induced", help="induced[:k] | sqrtx[:k]")
    pr.add_argument("--format", choices=["text", "json"], default="text")
    common(pr)
    pr.set_defaults(func=cmd_prob)

    c = sub.add_parser("chi", help="separability-function polynomials")
    c.add_argument("--d", type=int, required=True)
    c.add_argument("--k", type=int, default=0)
    c.add_argument("--check", action="store_true")
    c.add_argument("--curve", help="CSV path for a sampled eps,chi curve")
    c.add_argument("--curve-points", type=int, default=201)
    common(c)
    c.set_defaults(func=cmd_chi)

    v = sub.add_parser("volumes", help="exact volume table and separable-volume synthesis")
    v.add_argument("--N", type=int, action="append")
    common(v)
    v.set_defaults(func=cmd_volumes)

    q = sub.add_parser("qrtest", help="quasirandom sequence diagnostics and Bures runs")
    q.add_argument("--s", type=int, default=None)
    q.add_argument("--points", type=count, default=count("1e5"))
    q.add_argument("--alpha0", type=_fraction_float, default=None)
    q.add_argument("--seed", type=count_or_zero, default=0)
    q.add_argument("--bures", action="store_true")
    q.add_argument("--field", choices=["R", "C"], default="C")
    q.add_argument("--threads", type=int, default=0)
    q.add_argument("--stride", type=count, default=DEFAULT_STRIDE)
    q.add_argument("--trace", help="path prefix for the paired trace CSVs")
    common(q)
    q.set_defaults(func=cmd_qrtest)
    return p


def count_or_zero(text: str) -> int:
    return 0 if text.strip() in ("0", "0.0") else count(text)


def _fraction_float(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    if args.command == "qrtest":
        args.s_given = args.s is not None
        if args.s is None:
            args.s = 2
    try:
        return args.func(args)
    except (InvalidConfig, InvalidSpec, Unsupported, StreamExhausted, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
