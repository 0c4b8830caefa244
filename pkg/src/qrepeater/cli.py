"""Command-line front end: evaluate, optimize, scan, partition, ccimpact, simulate.

Every output file starts with a manifest holding the resolved inputs, the
tool version and a timestamp. Passing such a file back via ``--config``
reproduces it byte for byte (the recorded timestamp is reused). The
timestamp honours SOURCE_DATE_EPOCH when set.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import replace
from datetime import datetime, timezone

from . import __version__
from .keyrate import RepeaterConfig, evaluate
from .mc_sim import SimConfig, simulate_tau
from .noisy_ops import NoiseParams
from .optimizer import (
    SearchSpace,
    axis,
    cc_impact_grid,
    classify_strategy,
    grid_scan,
    optimize,
    optimize_fixed_memory,
)
from .rates import LinkParams

DEFAULTS = {
    "L": 600.0,
    "alpha": 0.17,
    "c": 2e5,
    "F0": "0.9",
    "pG": "0.96",
    "eta": 1.0,
    "N": 0,
    "k": None,
    "protocol": None,
    "strategy": None,
    "input": "depolarized",
    "no_cc": False,
    "kmax": 5,
    "nmax": 6,
    "M": 6,
    "trials": 100_000,
    "seed": 0,
    "workers": 1,
    "out": None,
    "format": None,
}

BASE_COLUMNS = ["F0", "pG", "K", "protocol", "N", "k", "strategy", "M", "below_cutoff"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="key=value file or a previous JSON/CSV output")
    p.add_argument("--L", type=float, default=S, help="total distance in km (default 600)")
    p.add_argument("--alpha", type=float, default=S, help="fiber attenuation in dB/km (default 0.17)")
    p.add_argument("--c", type=float, default=S, help="light speed in fiber, km/s (default 2e5)")
    p.add_argument("--F0", default=S, help="initial fidelity, or lo:hi:n for a range")
    p.add_argument("--pG", default=S, help="gate quality, or lo:hi:n for a range")
    p.add_argument("--eta", type=float, default=S, help="detector efficiency (default 1)")
    p.add_argument("--input", choices=["depolarized", "binary"], default=S)
    p.add_argument("--no-cc", dest="no_cc", action="store_true", default=S,
                   help="drop acknowledgment times for swapping and distillation")
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--out", default=S, help="output file")
    p.add_argument("--format", choices=["csv", "json"], default=S)


def _add_search(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--nmax", type=int, default=S, help="largest nesting level searched")
    p.add_argument("--kmax", type=int, default=S, help="largest number of rounds per level")
    p.add_argument("--strategy", default=S, help="comma list of alpha,beta,gamma")
    p.add_argument("--protocol", default=S, help="comma list of deutsch,duer,none")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="qrepeater", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="key rate of a single configuration")
    _add_common(p)
    p.add_argument("--protocol", choices=["deutsch", "duer", "none"], default=S)
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--k", default=S, help="comma-separated distillation vector")

    p = sub.add_parser("optimize", help="best configuration for one (F0, pG)")
    _add_common(p)
    _add_search(p)

    p = sub.add_parser("scan", help="optimum over an (F0, pG) grid")
    _add_common(p)
    _add_search(p)

    p = sub.add_parser("partition", help="best parallel setups for a fixed number of memories")
    _add_common(p)
    _add_search(p)
    p.add_argument("--M", type=int, default=S)

    p = sub.add_parser("ccimpact", help="relative key-rate change without acknowledgment times")
    _add_common(p)
    _add_search(p)

    p = sub.add_parser("simulate", help="Monte Carlo waiting time against the recurrence")
    _add_common(p)
    p.add_argument("--protocol", choices=["deutsch", "duer", "none"], default=S)
    p.add_argument("--N", type=int, default=S)
    p.add_argument("--k", default=S)
    p.add_argument("--trials", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    return parser


# --- configuration ----------------------------------------------------------


def _load_config(path: str) -> tuple[dict, str | None]:
    """Return (inputs, timestamp) from a key=value file or a previous output."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    manifest = None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        manifest = data.get("manifest", None)
        if manifest is None:
            return data, None
    elif stripped.startswith("# manifest:"):
        manifest = json.loads(stripped.splitlines()[0][len("# manifest:"):])
    if manifest is not None:
        return dict(manifest["inputs"]), manifest.get("timestamp")
    values = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"bad config line {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = val
    return values, None


def _coerce(values: dict) -> dict:
    kinds = {"L": float, "alpha": float, "c": float, "eta": float, "N": int, "kmax": int,
             "nmax": int, "M": int, "trials": int, "seed": int, "workers": int}
    out = dict(values)
    for key, kind in kinds.items():
        if out.get(key) is not None:
            out[key] = kind(out[key])
    if isinstance(out.get("no_cc"), str):
        out["no_cc"] = out["no_cc"].lower() in ("1", "true", "yes")
    for key in ("F0", "pG", "k", "strategy", "protocol"):
        if out.get(key) is not None:
            out[key] = str(out[key])
    return out


def resolve(args: argparse.Namespace) -> tuple[dict, str | None]:
    """Merge built-in defaults < config file < explicit flags."""
    explicit = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    merged = dict(DEFAULTS)
    stamp = None
    if getattr(args, "config", None):
        cfg, stamp = _load_config(args.config)
        unknown = set(cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        merged.update(cfg)
    merged.update(explicit)
    return _coerce(merged), stamp


def _timestamp(recorded: str | None) -> str:
    if recorded:
        return recorded
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _range(text: str) -> list[float]:
    parts = str(text).split(":")
    try:
        if len(parts) == 1:
            return [float(parts[0])]
        if len(parts) == 3:
            return [float(x) for x in axis(float(parts[0]), float(parts[1]), int(parts[2]))]
    except ValueError as exc:
        raise UsageError(f"bad range {text!r}: {exc}") from None
    raise UsageError(f"bad range {text!r}; expected value or lo:hi:n")


def _scalar(text: str, name: str) -> float:
    vals = _range(text)
    if len(vals) != 1:
        raise UsageError(f"--{name} must be a single value for this command")
    return vals[0]


def _vector(text, N: int) -> tuple[int, ...]:
    if text is None:
        return (0,) * (N + 1)
    try:
        k = tuple(int(x) for x in str(text).replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise UsageError(f"bad distillation vector {text!r}") from None
    if len(k) != N + 1:
        raise UsageError(f"distillation vector must have length N+1={N + 1}, got {len(k)}")
    return k


def _list(text, allowed, default) -> tuple[str, ...]:
    if text is None:
        return default
    items = tuple(s.strip() for s in str(text).split(",") if s.strip())
    bad = [s for s in items if s not in allowed]
    if bad or not items:
        raise UsageError(f"invalid choice(s) {bad or text!r}; allowed {list(allowed)}")
    return items


def _link(o: dict, N: int = 0) -> LinkParams:
    return LinkParams(L=o["L"], N=N, alpha=o["alpha"], c=o["c"])


def _space(o: dict, default_strategies=("alpha", "beta", "gamma")) -> SearchSpace:
    return SearchSpace(
        N_range=tuple(range(o["nmax"] + 1)),
        k_max=o["kmax"],
        strategies=_list(o["strategy"], ("alpha", "beta", "gamma"), default_strategies),
        protocols=_list(o["protocol"], ("deutsch", "duer", "none"), ("none", "deutsch", "duer")),
        cc_mode="no_cc" if o["no_cc"] else "with_cc",
        input_state=o["input"],
    )


# --- formatting ---------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return str(v)
        return f"{v:.5e}"
    if isinstance(v, (tuple, list)):
        return ";".join(str(x) for x in v)
    return "" if v is None else str(v)


def _json_safe(v):
    if isinstance(v, float) and (math.isinf(v) or math.isnan(v)):
        return None
    if isinstance(v, tuple):
        return [_json_safe(x) for x in v]
    if isinstance(v, list):
        return [_json_safe(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    return v


def render(fmt: str, manifest: dict, columns: list[str], rows: list[dict], extra: dict | None = None) -> str:
    if fmt == "json":
        doc = {"manifest": manifest, "columns": columns, "rows": rows}
        if extra:
            doc.update(extra)
        return json.dumps(_json_safe(doc), indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write("# manifest: " + json.dumps(manifest, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def _optimum_row(F0, pG, opt) -> dict:
    return {
        "F0": F0,
        "pG": pG,
        "K": opt.key_rate,
        "protocol": opt.protocol if not opt.no_key else "nokey",
        "N": opt.N,
        "k": opt.k,
        "strategy": opt.strategy,
        "M": opt.memories,
        "below_cutoff": opt.below_cutoff,
    }


# --- commands -------------------------------------------------------------------


def cmd_evaluate(o: dict):
    N = o["N"]
    k = _vector(o["k"], N)
    protocol = o["protocol"] or ("none" if not any(k) else "deutsch")
    F0, pG = _scalar(o["F0"], "F0"), _scalar(o["pG"], "pG")
    try:
        cfg = RepeaterConfig(protocol, _link(o, N), k, NoiseParams(pG, o["eta"]), F0, o["input"],
                             "no_cc" if o["no_cc"] else "with_cc")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = evaluate(cfg)
    row = {
        "F0": F0, "pG": pG, "K": res.key_rate, "protocol": protocol, "N": N, "k": k,
        "strategy": classify_strategy(k), "M": res.memories, "below_cutoff": res.key_rate < 1e-10,
        "R_rep": res.repeater_rate, "r_inf": res.secret_fraction, "tau": res.tau,
    }
    trace = res.trace
    extra = {
        "final_state": None if trace is None else list(trace.final_state.as_tuple()),
        "trace": None if trace is None else {
            "P0": trace.p0, "P_ES": list(trace.p_es), "P_D": [list(lvl) for lvl in trace.p_d],
            "states": [[list(s.as_tuple()) for s in lvl] for lvl in trace.states],
        },
    }
    lines = [
        f"protocol {protocol}  N={N}  k={k}  M={res.memories}",
        f"K      = {res.key_rate:.6e} bits/s/memory",
        f"R_rep  = {res.repeater_rate:.6e} pairs/s",
        f"r_inf  = {res.secret_fraction:.6f}",
        f"tau    = {res.tau:.6e} T0",
    ]
    if trace is not None:
        lines.append("final  = (" + ", ".join(f"{x:.6f}" for x in trace.final_state.as_tuple()) + ")")
        lines.append(f"P0     = {trace.p0:.6e}")
        for n in range(trace.N + 1):
            pd = ", ".join(f"{p:.6f}" for p in trace.p_d[n])
            lines.append(f"level {n}: P_ES={trace.p_es[n]:.6f}  P_D=[{pd}]")
    else:
        lines.append("distillation impossible: some round has zero success probability")
    return BASE_COLUMNS + ["R_rep", "r_inf", "tau"], [row], extra, "\n".join(lines)


def cmd_optimize(o: dict):
    F0, pG = _scalar(o["F0"], "F0"), _scalar(o["pG"], "pG")
    opt = optimize(F0, pG, o["eta"], _link(o), _space(o))
    row = _optimum_row(F0, pG, opt)
    text = "no positive key in search space" if opt.no_key else (
        f"best K = {opt.key_rate:.6e}  protocol {opt.protocol}  N={opt.N}  k={opt.k}  "
        f"strategy {opt.strategy}  M={opt.memories}"
    )
    return BASE_COLUMNS, [row], None, text


def cmd_scan(o: dict):
    F0s, pGs = _range(o["F0"]), _range(o["pG"])
    cells = grid_scan(F0s, pGs, o["eta"], _link(o), _space(o, ("alpha", "beta")), o["workers"])
    rows = [_optimum_row(c.F0, c.p_G, c.optimum) for c in cells]
    return BASE_COLUMNS, rows, None, f"{len(rows)} cells scanned"


def cmd_partition(o: dict):
    F0, pG = _scalar(o["F0"], "F0"), _scalar(o["pG"], "pG")
    M = o["M"]
    if M < 1:
        raise UsageError("--M must be at least 1")
    base = _space(o)
    protocols = [p for p in base.protocols if p != "none"] or ["none"]
    rows, lines = [], []
    for proto in protocols:
        space = replace(base, protocols=tuple({"none", proto}))
        part = optimize_fixed_memory(M, F0, pG, o["eta"], _link(o), space)
        labels = []
        for m in part.parts:
            opt = part.setups[m]
            row = _optimum_row(F0, pG, opt)
            row.update({"column": proto, "M_total": M, "K_total": part.key_rate})
            rows.append(row)
            labels.append(f"k_{m}={opt.k}")
        lines.append(f"{proto:8s} M={M}  K={part.key_rate:.6e}  setups: " + ", ".join(labels))
    return BASE_COLUMNS + ["column", "M_total", "K_total"], rows, None, "\n".join(lines)


def cmd_ccimpact(o: dict):
    F0s, pGs = _range(o["F0"]), _range(o["pG"])
    space = _space(o, ("alpha", "beta"))
    cells = cc_impact_grid(F0s, pGs, o["eta"], _link(o), space, o["workers"])
    rows, lines = [], []
    for c in cells:
        for mode, opt in (("with_cc", c.with_cc), ("no_cc", c.no_cc)):
            row = _optimum_row(c.F0, c.p_G, opt)
            row.update({"cc_mode": mode, "delta_rel": c.delta_rel})
            rows.append(row)
        lines.append(f"F0={c.F0:.4f} pG={c.p_G:.4f}  K_cc={c.with_cc.key_rate:.4e}  "
                     f"K_nocc={c.no_cc.key_rate:.4e}  delta_rel={c.delta_rel:.4f}")
    return BASE_COLUMNS + ["cc_mode", "delta_rel"], rows, None, "\n".join(lines)


def cmd_simulate(o: dict):
    N = o["N"]
    k = _vector(o["k"], N)
    protocol = o["protocol"] or ("none" if not any(k) else "deutsch")
    F0, pG = _scalar(o["F0"], "F0"), _scalar(o["pG"], "pG")
    cc_mode = "no_cc" if o["no_cc"] else "with_cc"
    try:
        cfg = RepeaterConfig(protocol, _link(o, N), k, NoiseParams(pG, o["eta"]), F0, o["input"], cc_mode)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    res = evaluate(cfg)
    if res.trace is None:
        raise UsageError("configuration has a zero-probability step; nothing to simulate")
    sim_cfg = SimConfig(res.trace, protocol, cc_mode, o["trials"], o["seed"])
    sim = simulate_tau(sim_cfg, o["workers"])
    analytic = sim_cfg.analytic_tau
    row = {
        "protocol": protocol, "N": N, "k": k, "trials": sim.trials, "seed": o["seed"],
        "mean_tau": sim.mean_tau, "std_error": sim.std_error, "analytic_tau": analytic,
        "rel_diff": (sim.mean_tau - analytic) / analytic,
    }
    cols = ["protocol", "N", "k", "trials", "seed", "mean_tau", "std_error", "analytic_tau", "rel_diff"]
    text = (f"simulated tau = {sim.mean_tau:.6e} +- {sim.std_error:.2e} T0 ({sim.trials} trials)\n"
            f"analytic  tau = {analytic:.6e} T0   relative difference {row['rel_diff']:+.4f}")
    return cols, [row], None, text


COMMANDS = {
    "evaluate": cmd_evaluate,
    "optimize": cmd_optimize,
    "scan": cmd_scan,
    "partition": cmd_partition,
    "ccimpact": cmd_ccimpact,
    "simulate": cmd_simulate,
}


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts, stamp = resolve(args)
        columns, rows, extra, text = COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"qrepeater {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"qrepeater {args.command}: error: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "tool": "qrepeater",
        "version": __version__,
        "command": args.command,
        # output location and worker count do not change results
        "inputs": {k: v for k, v in opts.items() if k not in ("out", "workers")},
        "seed": opts["seed"],
        "timestamp": _timestamp(stamp),
    }
    fmt = opts["format"] or ("csv" if opts["out"] is None or not str(opts["out"]).endswith(".json") else "json")
    if opts["out"]:
        try:
            with open(opts["out"], "w", encoding="utf-8", newline="") as fh:
                fh.write(render(fmt, manifest, columns, rows, extra))
        except OSError as exc:
            print(f"qrepeater {args.command}: cannot write {opts['out']}: {exc}", file=sys.stderr)
            return 2
        print(text)
    elif opts["format"]:
        sys.stdout.write(render(fmt, manifest, columns, rows, extra))
    else:
        print(text)
    return 0


def main() -> None:
    sys.exit(run())
