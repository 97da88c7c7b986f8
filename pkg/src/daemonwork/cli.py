"""Command-line experiment harness.

Subcommands: ``query`` (single-state report), ``fig2`` (random X-state
ensemble of gains versus concurrence), ``table1`` (the three correlation
verdicts), ``werner-sweep`` (closed form versus numeric gain across the
mixing parameter), ``theorem-check`` (randomized invariant suites). Output
is CSV for ensembles and JSON for reports; identical command lines produce
byte-identical output. ``--plot`` renders a matplotlib figure next to the
delimited output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .correlations import (
    NotImplementedDimension,
    NotTwoQubit,
    concurrence,
    is_classical_quantum,
    is_separable_2x2,
    quantum_discord,
)
from .daemonic import (
    MeasurementOptions,
    daemonic_value,
    gain_decomposition,
    gain_utility,
    optimize_measurement,
)
from .extraction import optimal_utility
from .quantum import (
    Hamiltonian,
    MeasurementBasis,
    ParseError,
    QuantumError,
    partial_trace_ancilla,
    random_unitary,
)
from .utility import cubic_from_xyz, exponential_utility, linear_utility, parse_utility
from .zoo import (
    parse_state,
    random_xyz_constrained,
    random_zero_gain_state,
    werner,
    werner_gain_incoherent,
    werner_threshold,
    x_state,
)


def _fmt(x) -> str:
    return f"{x:.12g}"


def _sample_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(index)])


def _bloch_angles(vec) -> tuple[float, float]:
    v = np.asarray(vec, dtype=complex)
    if abs(v[0]) > 1e-12:
        v = v * (v[0].conj() / abs(v[0]))
    theta = 2 * float(np.arctan2(abs(v[1]), abs(v[0])))
    phi = float(np.angle(v[1])) if abs(v[1]) > 1e-12 else 0.0
    return theta, phi


def _hamiltonian_from_spec(spec: str) -> Hamiltonian:
    try:
        energies = [float(tok) for tok in spec.split(",") if tok.strip()]
    except ValueError as exc:
        raise ParseError(f"bad energy list {spec!r}: {exc}") from None
    if len(energies) < 2:
        raise ParseError(f"need at least two energies, got {spec!r}")
    return Hamiltonian(np.array(energies))


# ---------------------------------------------------------------------------
# query


def run_query(state_spec: str, utility_spec: str, energies: str | None,
              q: float, seed: int, tol: float) -> dict:
    state, natural_h = parse_state(state_spec)
    h = _hamiltonian_from_spec(energies) if energies else natural_h
    if h is None:
        h = Hamiltonian(np.arange(state.d_s, dtype=float))
    if h.dim != state.d_s:
        raise ParseError(
            f"energies dimension {h.dim} does not match system dimension {state.d_s}"
        )
    u = parse_utility(utility_spec)
    rho_s = partial_trace_ancilla(state)
    opts = MeasurementOptions(seed=seed)

    erg = optimal_utility(rho_s.mat, h, linear_utility(), q)
    base = optimal_utility(rho_s.mat, h, u, q)
    best_lin = optimize_measurement(state, h, linear_utility(), q, opts)
    best = optimize_measurement(state, h, u, q, opts)
    theta, phi = _bloch_angles(best.basis.vectors[:, 0]) if state.d_a == 2 else (None, None)

    report = {
        "state": state_spec,
        "utility": u.label(),
        "q": q,
        "energies": [float(e) for e in h.energies],
        "ergotropy": erg.value,
        "optimal_utility": base.value,
        "gain_ergotropy": max(best_lin.gain, 0.0),
        "gain_utility": max(best.gain, 0.0),
        "daemonic_total": best.total,
        "optimal_basis_theta": theta,
        "optimal_basis_phi": phi,
    }
    if (state.d_s, state.d_a) == (2, 2):
        report["concurrence"] = concurrence(state)
        report["discord"] = quantum_discord(state)
        report["separable"] = is_separable_2x2(state)
        report["classical_quantum"] = is_classical_quantum(state, tol=max(tol, 1e-7))
    else:
        report["concurrence"] = None
        report["discord"] = None
        report["separable"] = None
        report["classical_quantum"] = None
    return report


# ---------------------------------------------------------------------------
# fig2 ensemble


def fig2_samples(n: int, seed: int, q: float = 0.5,
                 opts: MeasurementOptions | None = None) -> list[tuple]:
    """Random X-state ensemble: rows ``(index, p, C, X, Y, Z, gain)``.

    Per-sample generators are derived from ``(seed, index)``, so any prefix
    of the ensemble is reproducible independently of batching.
    """
    h = Hamiltonian(np.array([0.0, 1.0]))
    rows = []
    for i in range(n):
        rng = _sample_rng(seed, i)
        x, y, z, p = random_xyz_constrained(rng)
        conc = float(rng.uniform(0.0, 2 * np.sqrt(p * (1 - p))))
        state = x_state(p, conc)
        u = cubic_from_xyz(x, y, z)
        sample_opts = opts or MeasurementOptions(seed=i)
        gain = gain_utility(state, h, u, q, sample_opts)
        rows.append((i, p, conc, x, y, z, gain))
    return rows


def fig2_summary(rows) -> dict:
    low_gain_entangled = sum(1 for r in rows if r[2] > 0.5 and r[6] < 1e-3)
    return {
        "n": len(rows),
        "count_concurrence_gt_0.5_gain_lt_1e-3": low_gain_entangled,
        "max_gain": max((r[6] for r in rows), default=0.0),
    }


def fig2_csv(rows) -> str:
    lines = ["index,p,C,X,Y,Z,gain"]
    for r in rows:
        lines.append(",".join([str(r[0])] + [_fmt(v) for v in r[1:]]))
    summary = fig2_summary(rows)
    lines.append("# summary")
    for key, val in summary.items():
        lines.append(f"# {key},{_fmt(val) if isinstance(val, float) else val}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# werner sweep


def werner_sweep_rows(x_mom: float, y_mom: float, grid: int, q: float = 0.5,
                      seed: int = 0) -> list[tuple]:
    """Rows ``(z, gain_closed_form, gain_numeric)`` over a uniform z-grid."""
    werner_threshold(x_mom, y_mom)  # raises ZeroY early for a bad pair
    h = Hamiltonian(np.array([0.0, 1.0]))
    u = cubic_from_xyz(x_mom, y_mom, 0.0)
    rows = []
    for i, z in enumerate(np.linspace(0.0, 1.0, grid)):
        closed = werner_gain_incoherent(x_mom, y_mom, float(z))
        numeric = gain_utility(werner(float(z)), h, u, q, MeasurementOptions(seed=seed))
        rows.append((float(z), closed, numeric))
    return rows


def werner_sweep_csv(rows, x_mom: float, y_mom: float) -> str:
    lines = ["z,gain_closed_form,gain_numeric"]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in r))
    z0 = werner_threshold(x_mom, y_mom)
    max_diff = max(abs(r[1] - r[2]) for r in rows)
    first_pos = next((r[0] for r in rows if r[2] > 1e-7), None)
    lines.append("# summary")
    lines.append(f"# threshold_closed_form,{_fmt(z0)}")
    lines.append(f"# first_positive_gain_z,{_fmt(first_pos) if first_pos is not None else 'none'}")
    lines.append(f"# max_abs_difference,{_fmt(max_diff)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# table1


def run_table1(seed: int, tol: float) -> dict:
    h = Hamiltonian(np.array([0.0, 1.0]))
    rows = []

    # risk-neutral agents: zero gain forces a classical-quantum state
    draws, failures = 5, 0
    worst = 0.0
    for i in range(draws):
        state = random_zero_gain_state(h, 0.0, 0.5, seed=_sample_rng(seed, i))
        gain = gain_utility(state, h, linear_utility(), 0.5, MeasurementOptions(seed=i))
        worst = max(worst, gain)
        if gain > tol or not is_classical_quantum(state, tol=1e-6):
            failures += 1
    rows.append({
        "risk_aversion": "zero",
        "claim": "zero gain implies classical-quantum",
        "draws": draws,
        "failures": failures,
        "worst_gain": worst,
        "pass": failures == 0,
    })

    # constant nonzero risk aversion: zero-gain states are separable
    failures, worst = 0, 0.0
    for i in range(draws):
        rng = _sample_rng(seed, 100 + i)
        state = random_zero_gain_state(h, 1.0, 0.5, seed=rng)
        gain = gain_utility(state, h, exponential_utility(1.0), 0.5, MeasurementOptions(seed=i))
        worst = max(worst, gain)
        if gain > tol or not is_separable_2x2(state):
            failures += 1
    rows.append({
        "risk_aversion": "constant nonzero",
        "claim": "zero gain implies separable",
        "draws": draws,
        "failures": failures,
        "worst_gain": worst,
        "pass": failures == 0,
    })

    # non-constant risk aversion: an entangled state with zero gain
    x_mom, y_mom, z_mix = 0.6, 0.8, 0.45
    state = werner(z_mix)
    witness_gain = gain_utility(state, h, cubic_from_xyz(x_mom, y_mom, 0.0),
                                0.5, MeasurementOptions(seed=seed))
    entangled = not is_separable_2x2(state)
    z0 = werner_threshold(x_mom, y_mom)
    ok = entangled and witness_gain <= tol and z0 > 1 / 3
    rows.append({
        "risk_aversion": "non-constant",
        "claim": "zero gain does not imply separable",
        "witness": {"X": x_mom, "Y": y_mom, "z": z_mix, "threshold": z0},
        "witness_gain": witness_gain,
        "witness_entangled": entangled,
        "pass": ok,
    })
    return {"rows": rows, "all_pass": all(r["pass"] for r in rows)}


# ---------------------------------------------------------------------------
# theorem-check


def run_theorem_check(n: int, seed: int, tol: float) -> dict:
    h = Hamiltonian(np.array([0.0, 1.0]))
    report: dict = {"n": n}
    if n == 0:
        return report

    gain_failures = ppt_failures = 0
    worst_gain = worst_lemma = 0.0
    q_values = (0.3, 0.5, 0.7)
    for i in range(n):
        rng = _sample_rng(seed, i)
        r = float(rng.uniform(-1.0, 1.0))
        while abs(r) < 0.01:
            r = float(rng.uniform(-1.0, 1.0))
        q = q_values[i % len(q_values)]
        state = random_zero_gain_state(h, r, q, seed=rng)
        gain = gain_utility(state, h, exponential_utility(r), q, MeasurementOptions(seed=i))
        worst_gain = max(worst_gain, gain)
        if gain > tol:
            gain_failures += 1
        if not is_separable_2x2(state):
            ppt_failures += 1
        for basis in (MeasurementBasis.computational(2),
                      MeasurementBasis(random_unitary(2, rng).mat)):
            entries = gain_decomposition(state, basis, h, r, q)
            direct = daemonic_value(state, basis, h, exponential_utility(r), q)
            resid = abs(sum(p * e for p, e in entries) - direct.gain)
            worst_lemma = max(worst_lemma, resid)
    report["forward"] = {
        "draws": n,
        "gain_failures": gain_failures,
        "ppt_failures": ppt_failures,
        "worst_gain": worst_gain,
        "worst_decomposition_residual": worst_lemma,
        "pass": gain_failures == 0 and ppt_failures == 0 and worst_lemma <= 1e-9,
    }

    cq_failures = 0
    worst_gain0 = 0.0
    for i in range(n):
        state = random_zero_gain_state(h, 0.0, 0.5, seed=_sample_rng(seed, 10_000 + i))
        gain = gain_utility(state, h, linear_utility(), 0.5, MeasurementOptions(seed=i))
        worst_gain0 = max(worst_gain0, gain)
        if gain > tol or not is_classical_quantum(state, tol=1e-6):
            cq_failures += 1
    report["risk_neutral"] = {
        "draws": n,
        "classical_quantum_failures": cq_failures,
        "worst_gain": worst_gain0,
        "pass": cq_failures == 0,
    }
    report["all_pass"] = report["forward"]["pass"] and report["risk_neutral"]["pass"]
    return report


# ---------------------------------------------------------------------------
# wiring


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _report_text(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    lines = ["key,value"]

    def flatten(prefix, obj):
        if isinstance(obj, dict):
            for k, v in obj.items():
                flatten(f"{prefix}{k}." if prefix else f"{k}.", v) if isinstance(v, (dict, list)) \
                    else lines.append(f"{prefix}{k},{v}")
        elif isinstance(obj, list):
            for idx, v in enumerate(obj):
                flatten(f"{prefix}{idx}.", v) if isinstance(v, (dict, list)) \
                    else lines.append(f"{prefix}{idx},{v}")

    flatten("", report)
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="daemonwork",
        description="Optimal and daemonic work extraction under expected utility.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_n=False):
        p.add_argument("--seed", type=int, default=0, help="master RNG seed")
        p.add_argument("--q", type=float, default=0.5, help="quasiprobability parameter")
        p.add_argument("--tol", type=float, default=1e-7, help="acceptance tolerance")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        if with_n:
            p.add_argument("--n", type=int, default=100, help="ensemble size")

    p = sub.add_parser("query", help="single-state report")
    p.add_argument("state", help="state spec, e.g. werner:z=0.5 or example:r=1,c=0.2,e1=0,e2=1")
    p.add_argument("--utility", default="linear", help="utility spec, e.g. exp:r=1")
    p.add_argument("--energies", default=None, help="comma list of energies (default from state)")
    common(p)

    p = sub.add_parser("fig2", help="random X-state gain-vs-concurrence ensemble")
    common(p, with_n=True)
    p.add_argument("--plot", action="store_true", help="render a PNG next to --out")

    p = sub.add_parser("table1", help="verify the three correlation verdicts")
    common(p)

    p = sub.add_parser("werner-sweep", help="Werner gain: closed form vs numeric")
    p.add_argument("--x", type=float, default=0.6, help="utility moment X")
    p.add_argument("--y", type=float, default=0.8, help="utility moment Y")
    p.add_argument("--grid", type=int, default=101, help="number of z points")
    common(p)
    p.add_argument("--plot", action="store_true", help="render a PNG next to --out")

    p = sub.add_parser("theorem-check", help="randomized invariant suites")
    common(p, with_n=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "plot", False) and args.out is None:
        parser.error("--plot requires --out")
    try:
        if args.command == "query":
            fmt = args.format or "json"
            report = run_query(args.state, args.utility, args.energies,
                               args.q, args.seed, args.tol)
            _emit(_report_text(report, fmt), args.out)
        elif args.command == "fig2":
            fmt = args.format or "csv"
            rows = fig2_samples(args.n, args.seed, args.q)
            if fmt == "csv":
                _emit(fig2_csv(rows), args.out)
            else:
                payload = {
                    "rows": [dict(zip(("index", "p", "C", "X", "Y", "Z", "gain"), r)) for r in rows],
                    "summary": fig2_summary(rows),
                }
                _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
            if args.plot:
                from .plotting import save_gain_scatter

                save_gain_scatter(rows, Path(args.out).with_suffix(".png"))
        elif args.command == "table1":
            fmt = args.format or "json"
            _emit(_report_text(run_table1(args.seed, args.tol), fmt), args.out)
        elif args.command == "werner-sweep":
            fmt = args.format or "csv"
            rows = werner_sweep_rows(args.x, args.y, args.grid, args.q, args.seed)
            if fmt == "csv":
                _emit(werner_sweep_csv(rows, args.x, args.y), args.out)
            else:
                payload = {
                    "rows": [dict(zip(("z", "gain_closed_form", "gain_numeric"), r)) for r in rows],
                    "threshold": werner_threshold(args.x, args.y),
                }
                _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
            if args.plot:
                from .plotting import save_werner_sweep

                save_werner_sweep(rows, Path(args.out).with_suffix(".png"),
                                  threshold=werner_threshold(args.x, args.y))
        elif args.command == "theorem-check":
            fmt = args.format or "json"
            _emit(_report_text(run_theorem_check(args.n, args.seed, args.tol), fmt), args.out)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except QuantumError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
