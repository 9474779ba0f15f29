"""Command-line front end: sweeps, thresholds, network classes, oracle runs."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import __version__
from .certificates import build_document, form_from_dict, form_to_dict, load_document, verify_document, write_document
from .criteria import MeasurementScheme, alpha_threshold, n_threshold, steerable
from .errors import NumericalError, SteerkitError, ValidationError
from .lhs import assemblage_from_pauli, decide, lhs_feasible
from .network import classify, pairwise_matrix
from .polytope import Mode, bloch_polytope
from .projective import classify_all_projective
from .qstate import PauliForm, TwoQubitState, XStateParams, pauli_decompose, pauli_reconstruct, x_concurrence
from .scenarios import Kind, PairRole, Scenario, check_n, parse_kind, parse_role, reduced_params

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

CSV_HEADER = (
    "scenario", "n", "alpha", "mu", "scheme", "direction",
    "lhs", "rhs", "margin", "verdict", "concurrence", "runtime_ms",
)
_DIRECTION_FLAG = {"ab": PairRole.ALICE_TO_BOB, "ba": PairRole.BOB_TO_ALICE}


# -- value formatting -------------------------------------------------------------


def fmt_float(v: float) -> str:
    """Shortest round-trip text; integers keep a bare form so n reads naturally."""
    v = float(v)
    if math.isfinite(v) and v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def parse_range(text: str, name: str) -> list[float]:
    """'0.1,0.2', 'lo:hi:step' (inclusive) or a single number."""
    text = str(text).strip()
    if not text:
        raise ValidationError(f"--{name} is empty")
    values: list[float] = []
    for part in text.split(","):
        part = part.strip()
        try:
            if ":" in part:
                lo, hi, step = (float(p) for p in part.split(":"))
                if step <= 0:
                    raise ValidationError(f"--{name} step must be positive")
                count = math.floor((hi - lo) / step + 1e-9) + 1
                values.extend(lo + i * step for i in range(max(count, 0)))
            elif part:
                values.append(float(part))
        except ValueError:
            raise ValidationError(f"cannot parse --{name} value {part!r}") from None
    if not values:
        raise ValidationError(f"--{name} range is empty")
    if not all(math.isfinite(v) for v in values):
        raise ValidationError(f"--{name} values must be finite")
    return values


def _direction(text: str) -> PairRole:
    t = str(text).strip().lower()
    if t in _DIRECTION_FLAG:
        return _DIRECTION_FLAG[t]
    return parse_role(t)


def _flag(role: PairRole) -> str:
    return "ab" if role is PairRole.ALICE_TO_BOB else "ba"


# -- sweep records ------------------------------------------------------------------


@dataclass(frozen=True)
class RunRecord:
    scenario: str
    n: float
    alpha: float
    mu: float
    scheme: str
    direction: str
    lhs: float
    rhs: float
    margin: float
    verdict: str
    concurrence: float
    runtime_ms: float

    def to_row(self) -> list[str]:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            out.append(v if isinstance(v, str) else fmt_float(v))
        return out

    @classmethod
    def from_row(cls, row: dict | list) -> RunRecord:
        if isinstance(row, list):
            row = dict(zip(CSV_HEADER, row))
        kw = {}
        for f in fields(cls):
            raw = row[f.name]
            kw[f.name] = raw if f.type == "str" else float(raw)
        return cls(**kw)


def read_csv(path: str | Path) -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [RunRecord.from_row(r) for r in csv.DictReader(fh)]


@dataclass(frozen=True)
class SweepSpec:
    kind: Kind
    ns: tuple[float, ...]
    alphas: tuple[float, ...]
    mus: tuple[float, ...]
    schemes: tuple[MeasurementScheme, ...]
    direction: PairRole
    out: str | None
    fmt: str
    deterministic: bool = False
    boundary: bool = False

    def __post_init__(self) -> None:
        for name in ("ns", "alphas", "mus", "schemes"):
            if not getattr(self, name):
                raise ValidationError(f"sweep {name} is empty")
        for n in self.ns:
            check_n(self.kind, n, integral=False)
        for a in self.alphas:
            if not 0.0 < a <= 0.5:
                raise ValidationError(f"alpha must lie in (0, 1/2], got {a}")
        for m in self.mus:
            if not 0.0 <= m <= 1.0:
                raise ValidationError(f"mu must lie in [0, 1], got {m}")
        if self.fmt not in ("csv", "json"):
            raise ValidationError(f"unknown format {self.fmt!r}")

    def grid(self):
        for n in self.ns:
            for a in self.alphas:
                for m in self.mus:
                    for s in self.schemes:
                        yield n, a, m, s


def oriented_params(kind: Kind, n: float, alpha: float, mu: float, direction: PairRole) -> XStateParams:
    x = reduced_params(kind, n, alpha, mu)
    return x.swap() if direction is PairRole.BOB_TO_ALICE else x


def _concurrence(x: XStateParams) -> float:
    return max(0.0, float(x_concurrence(*x.entries())))


def evaluate_point(kind: Kind, n, alpha, mu, scheme: MeasurementScheme, direction: PairRole):
    """(lhs, rhs, margin, verdict, concurrence) at one grid point."""
    x = oriented_params(kind, n, alpha, mu, direction)
    conc = _concurrence(x)
    if scheme.analytic:
        rep = steerable(x, scheme)
        return rep.lhs, rep.rhs, rep.margin, "steerable" if rep.steerable else "unsteerable", conc
    verdict = classify_all_projective(x.to_pauli(), scheme.resolution)
    return math.nan, math.nan, math.nan, verdict.status.value, conc


def _threads() -> int:
    env = os.environ.get("STEERKIT_THREADS")
    if env:
        try:
            k = int(env)
        except ValueError:
            raise ValidationError(f"STEERKIT_THREADS must be an integer, got {env!r}") from None
        if k < 1:
            raise ValidationError("STEERKIT_THREADS must be at least 1")
        return k
    return os.cpu_count() or 1


def run_sweep(spec: SweepSpec) -> tuple[list[RunRecord], list[float | None], bool]:
    """Rows in grid order, optional boundary values, and whether any point failed."""
    points = list(spec.grid())

    def work(p):
        n, a, m, s = p
        t0 = time.perf_counter()
        try:
            lhs, rhs, margin, verdict, conc = evaluate_point(spec.kind, n, a, m, s, spec.direction)
        except NumericalError:
            lhs = rhs = margin = conc = math.nan
            verdict = "error"
        ms = 0.0 if spec.deterministic else round((time.perf_counter() - t0) * 1e3, 3)
        rec = RunRecord(spec.kind.value, n, a, m, s.name, _flag(spec.direction), lhs, rhs, margin, verdict, conc, ms)
        bnd = None
        if spec.boundary and verdict != "error" and s.analytic:
            try:
                bnd = alpha_threshold(spec.kind, n, s, spec.direction, m)
            except NumericalError:
                bnd = math.nan
        return rec, bnd

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(work, points))
    rows = [r for r, _ in results]
    bounds = [b for _, b in results]
    failed = any(r.verdict == "error" for r in rows)
    return rows, bounds, failed


def render_sweep(rows, bounds, spec: SweepSpec) -> str:
    if spec.fmt == "json":
        recs = []
        for r, b in zip(rows, bounds):
            d = asdict(r)
            if spec.boundary:
                d["boundary"] = b
            recs.append({k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()})
        return json.dumps(recs, indent=1, default=_json_default) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(CSV_HEADER) + (["boundary"] if spec.boundary else []))
    for r, b in zip(rows, bounds):
        extra = [fmt_float(b) if b is not None else "none"] if spec.boundary else []
        w.writerow(r.to_row() + extra)
    return buf.getvalue()


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


# -- commands -------------------------------------------------------------------------


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        kind=parse_kind(args.scenario),
        ns=tuple(parse_range(args.n, "n")),
        alphas=tuple(parse_range(args.alpha, "alpha")),
        mus=tuple(parse_range(args.mu, "mu")),
        schemes=tuple(MeasurementScheme.parse(s) for s in str(args.scheme).split(",") if s.strip()),
        direction=_direction(args.direction),
        out=args.out,
        fmt=args.format,
        deterministic=args.deterministic,
        boundary=args.boundary,
    )
    rows, bounds, failed = run_sweep(spec)
    _emit(render_sweep(rows, bounds, spec), spec.out)
    if failed:
        print("numerical failure on at least one grid point (rows marked 'error')", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _single(text, name: str) -> float:
    vals = parse_range(text, name)
    if len(vals) != 1:
        raise ValidationError(f"--{name} takes a single value here")
    return vals[0]


def _fmt_threshold(v: float | None) -> str:
    if v is None:
        return "none"
    if math.isinf(v):
        return "inf"
    return f"{v:.9f}"


def cmd_threshold(args) -> int:
    kind = parse_kind(args.scenario)
    scheme = MeasurementScheme.parse(args.scheme)
    direction = _direction(args.direction)
    mu = _single(args.mu, "mu")
    if (args.n is None) == (args.alpha is None):
        raise ValidationError("threshold needs exactly one of --n (solve for alpha) or --alpha (solve for n)")
    record = {"scenario": kind.value, "scheme": scheme.name, "direction": _flag(direction), "mu": mu}
    if args.n is not None:
        n = _single(args.n, "n")
        value = alpha_threshold(kind, n, scheme, direction, mu)
        record.update(n=n, solve_for="alpha")
    else:
        alpha = _single(args.alpha, "alpha")
        value = n_threshold(kind, scheme, direction, alpha, mu)
        record.update(alpha=alpha, solve_for="n")
    record["threshold"] = None if value is None else (str(value) if math.isinf(value) else value)
    print(_fmt_threshold(value))
    if args.out:
        Path(args.out).write_text(json.dumps(record, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    elif args.format == "json":
        print(json.dumps(record, sort_keys=True))
    return EXIT_OK


def cmd_classify(args) -> int:
    kind = parse_kind(args.scenario)
    n = _single(args.n, "n")
    if not float(n).is_integer():
        raise ValidationError("classify needs an integer --n")
    sc = Scenario(kind, int(n), _single(args.alpha, "alpha"), _single(args.mu, "mu"))
    scheme = MeasurementScheme.parse(args.scheme)
    graph = pairwise_matrix(sc, scheme)
    doc = {
        "scenario": kind.value,
        "n": sc.n,
        "alpha": sc.alpha,
        "mu": sc.mu,
        "scheme": scheme.name,
        "case": classify(graph).value,
        "matrix": graph.matrix(),
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


def load_state_file(path: str | Path) -> PauliForm:
    """Accepts {"rho": {"re": [[..]], "im": [[..]]}}, {"pauli": {a, b, T}} or {"x": {a, b, t_x, t_y, t_z}}."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read state file {path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError("state file must hold a JSON object")
    try:
        if "rho" in doc:
            r = doc["rho"]
            rho = np.asarray(r["re"], dtype=float) + 1j * np.asarray(r.get("im", np.zeros((4, 4))), dtype=float)
            return pauli_decompose(TwoQubitState(rho))
        if "pauli" in doc:
            form = form_from_dict(doc["pauli"])
            pauli_reconstruct(form)
            return form
        if "x" in doc:
            x = doc["x"]
            params = XStateParams(*(float(x[k]) for k in ("a", "b", "t_x", "t_y", "t_z")))
            if not params.is_valid():
                raise ValidationError("X-state parameters do not give a density matrix")
            return params.to_pauli()
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed state file: {exc}") from None
    raise ValidationError("state file needs one of the keys 'rho', 'pauli' or 'x'")


def _parse_polytope(text: str) -> tuple[str, int]:
    try:
        mode, count = str(text).split(":")
        count = int(count)
    except ValueError:
        raise ValidationError(f"--polytope expects mode:vertices, got {text!r}") from None
    if mode not in ("both", "inscribed", "circumscribed"):
        raise ValidationError(f"unknown polytope mode {mode!r}")
    return mode, count


def cmd_oracle(args) -> int:
    if args.verify:
        return _verify_path(args.verify)
    scheme = MeasurementScheme.parse(args.scheme)
    if args.state:
        form = load_state_file(args.state)
        record = {"source": "file", "path": str(args.state)}
    else:
        if args.scenario is None:
            raise ValidationError("oracle needs --state or --scenario with --n and --alpha")
        kind = parse_kind(args.scenario)
        direction = _direction(args.direction)
        sc = Scenario(kind, int(_single(args.n, "n")), _single(args.alpha, "alpha"), _single(args.mu, "mu"))
        form = oriented_params(kind, sc.n, sc.alpha, sc.mu, direction).to_pauli()
        record = {"source": "scenario", "scenario": kind.value, "n": sc.n, "alpha": sc.alpha,
                  "mu": sc.mu, "direction": _flag(direction)}
    record["scheme"] = scheme.name
    record["pauli"] = form_to_dict(form)
    directions = None
    if scheme.kind == "projective":
        verdict = classify_all_projective(form, scheme.resolution)
    elif scheme.kind == "dihedral":
        mode, count = _parse_polytope(args.polytope)
        record["polytope"] = {"mode": mode, "vertices": count}
        directions = scheme.directions()
        asm = assemblage_from_pauli(form, directions)
        if mode == "both":
            verdict = decide(asm, bloch_polytope(count, Mode.INSCRIBED), bloch_polytope(count, Mode.CIRCUMSCRIBED))
        else:
            verdict = lhs_feasible(asm, bloch_polytope(count, mode))
    else:
        raise ValidationError(
            "the equatorial scheme has infinitely many settings; use dihedral:<m> or projective:<res>"
        )
    doc = build_document(record, verdict, directions)
    print(verdict.status.value)
    if args.out:
        write_document(doc, args.out)
    return EXIT_OK


def _verify_path(path: str) -> int:
    doc = load_document(path)
    ok, message = verify_document(doc)
    print(f"{'verified' if ok else 'FAILED'}: {doc['verdict']} ({message})")
    return EXIT_OK if ok else EXIT_NUMERICAL


def cmd_verify(args) -> int:
    return _verify_path(args.certificate)


def cmd_reduce(args) -> int:
    kind = parse_kind(args.scenario)
    n = _single(args.n, "n")
    check_n(kind, n, integral=False)
    alpha = _single(args.alpha, "alpha")
    mu = _single(args.mu, "mu")
    if not 0.0 < alpha <= 0.5 or not 0.0 <= mu <= 1.0:
        raise ValidationError("need 0 < alpha <= 1/2 and 0 <= mu <= 1")
    direction = _direction(args.direction)
    x = oriented_params(kind, n, alpha, mu, direction)
    doc = {
        "scenario": kind.value, "n": n, "alpha": alpha, "mu": mu, "direction": _flag(direction),
        "a": x.a, "b": x.b, "t_x": x.t_x, "t_y": x.t_y, "t_z": x.t_z,
        "t_perp": x.t_perp, "concurrence": _concurrence(x),
        "matrix": x.matrix().real.tolist(),
    }
    _emit(json.dumps(doc, indent=1) + "\n", args.out)
    return EXIT_OK


# -- argument parsing ------------------------------------------------------------------


def read_config(path: str | Path) -> dict[str, str]:
    """Flat `key = value` lines; '#' starts a comment."""
    cfg = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            key, sep, value = line.partition(":")
        if not sep:
            raise ValidationError(f"{path}:{lineno}: expected key = value")
        cfg[key.strip().replace("-", "_")] = value.strip()
    return cfg


_BOOL_KEYS = {"deterministic", "boundary"}


def _common(p: argparse.ArgumentParser, *, scenario_required: bool = False) -> None:
    p.add_argument("--config", help="flat key = value file; flags override it")
    p.add_argument("--scenario", choices=[k.value for k in Kind], required=False)
    p.add_argument("--n")
    p.add_argument("--alpha")
    p.add_argument("--mu", default="0")
    p.add_argument("--scheme", default="m2")
    p.add_argument("--direction", default="ab")
    p.add_argument("--out")
    p.add_argument("--format", choices=["csv", "json"], default="csv")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="steerkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"steerkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="grid of criterion (or oracle) evaluations")
    _common(p)
    p.add_argument("--deterministic", action="store_true", help="write runtime_ms as 0 for byte-stable output")
    p.add_argument("--boundary", action="store_true", help="append the alpha threshold as an extra column")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("threshold", help="critical alpha (given --n) or critical n (given --alpha)")
    _common(p)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("classify", help="network case and directed steering matrix")
    _common(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("oracle", help="LP steering oracle with a certificate file")
    _common(p)
    p.add_argument("--state", help="JSON state file")
    p.add_argument("--polytope", default="both:162", help="inscribed|circumscribed|both:<vertices>")
    p.add_argument("--verify", metavar="CERT", help="re-check a stored certificate instead")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("reduce", help="reduced two-qubit X-state of a scenario")
    _common(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", help="re-check a stored certificate")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)
    return parser


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg_path = getattr(args, "config", None)
    if cfg_path:
        cfg = read_config(cfg_path)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise ValidationError(f"unknown config keys: {sorted(unknown)}")
        defaults = {}
        for k, v in cfg.items():
            if k in _BOOL_KEYS:
                defaults[k] = v.lower() in ("1", "true", "yes", "on")
            else:
                defaults[k] = v
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    if args.command not in ("verify", "oracle") and getattr(args, "scenario", None) is None:
        parser.error("--scenario is required")
    if args.command in ("sweep", "classify", "reduce"):
        missing = [f"--{k}" for k in ("n", "alpha") if getattr(args, k) is None]
        if missing:
            parser.error(f"missing {' and '.join(missing)}")
    return args


def main(argv: list[str] | None = None) -> int:
    try:
        args = parse_args(argv)
        return args.func(args)
    except ValidationError as exc:
        print(f"steerkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"steerkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except SteerkitError as exc:
        print(f"steerkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
