"""Command-line front end.

Exit codes: 0 success, 1 a verification check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

from divmax.bounds import (
    BoundReport,
    bound_dbn,
    bound_independence,
    bound_mixture,
    bound_rbm,
    bound_umpd,
    bound_union_partitions,
    exact_independence,
    exact_multinomial,
    exact_partition,
    lower_bound_expfam,
    mpd_exact,
    param_count,
)
from divmax.combinatorics import enumerate_subcube_partitions, independence_maximizers, partition_maximizers
from divmax.errors import DivmaxError, DomainError, UnsupportedError
from divmax.maximize import AscentConfig, GridSpec, MaxResult, grid_oracle, multistart_ascent
from divmax.modelzoo.mixture import EMConfig
from divmax.modelzoo.models import (
    DBNModel,
    FullModel,
    IndependenceModel,
    MixtureModel,
    Model,
    MPDModel,
    MultinomialModel,
    PartitionModel,
    RBMModel,
    UMPDModel,
    UnionPartitionModel,
    model_from_json,
)
from divmax.modelzoo.networks import NetConfig
from divmax.probcore import Dist, dist_from_json
from divmax.suites import SUITES, SuiteConfig, run_suite

LN2 = math.log(2)
FAMILIES = ("independence", "mixture", "rbm", "dbn", "umpd", "union-partitions")
# keys whose values are divergences and follow the --bits flag
_DIVERGENCE_KEYS = {"divergence", "value", "observed", "gap", "expected"}


class InputError(DivmaxError, ValueError):
    """Unreadable or malformed command-line input."""


def _seed_default() -> int:
    raw = os.environ.get("DIVMAX_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"DIVMAX_SEED must be an integer, got {raw!r}") from None


def _load_json(arg: str, what: str):
    """Parse ``arg`` as inline JSON or as the path of a JSON file."""
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        path = Path(arg)
        if not path.is_file():
            raise InputError(f"{what}: {arg!r} is neither inline JSON nor a readable file")
        text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"{what}: invalid JSON ({e})") from None


def _configs(args) -> tuple[EMConfig, NetConfig, AscentConfig]:
    em, net, asc = EMConfig(seed=args.seed), NetConfig(seed=args.seed), AscentConfig(seed=args.seed)
    if args.restarts is not None:
        em = EMConfig(**{**em.__dict__, "restarts": args.restarts})
        net = NetConfig(**{**net.__dict__, "restarts": args.restarts})
        asc = AscentConfig(**{**asc.__dict__, "restarts": args.restarts})
    if args.max_iters is not None:
        em = EMConfig(**{**em.__dict__, "max_iter": args.max_iters})
        net = NetConfig(**{**net.__dict__, "max_iter": args.max_iters})
        asc = AscentConfig(**{**asc.__dict__, "max_iter": args.max_iters})
    return em, net, asc


def _model(args) -> Model:
    em, net, _ = _configs(args)
    return model_from_json(_load_json(args.model, "model"), em, net)


def _scale(obj, factor: float):
    """Convert divergence-valued fields from nats by ``factor``."""
    if isinstance(obj, dict):
        return {k: (_scale_value(v, factor) if k in _DIVERGENCE_KEYS else _scale(v, factor)) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_scale(v, factor) for v in obj]
    return obj


def _scale_value(v, factor):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return v * factor
    if isinstance(v, dict):
        return _scale(v, factor)
    return v


def _flatten(obj, prefix: str = "") -> dict:
    out = {}
    for k, v in obj.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = json.dumps(v)
        else:
            out[key] = v
    return out


def _csv_cell(v) -> str:
    if v is None:
        return "n/a"
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, float):
        return "inf" if math.isinf(v) else format(v, ".12g")
    return str(v)


def _render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    header = list(rows[0]) if rows else []
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(row.get(h)) for h in header])
    return buf.getvalue()


def _emit(args, obj) -> None:
    factor = 1.0 / LN2 if args.bits else 1.0
    obj = _scale(obj, factor)
    if args.format == "csv":
        rows = obj if isinstance(obj, list) else [obj]
        text = _render_csv([_flatten(r) for r in rows])
    else:
        text = json.dumps(obj, indent=2, allow_nan=False, default=str) + "\n"
    _write(args, text)


def _write(args, text: str) -> None:
    out = getattr(args, "out", None)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# commands


def cmd_project(args) -> int:
    model = _model(args)
    p = dist_from_json(_load_json(args.dist, "distribution"))
    if p.space != model.space:
        raise DomainError(f"distribution lives on cards {list(p.space.cards)}, "
                          f"model on {list(model.space.cards)}")
    _emit(args, {"model": model.to_json(), **model.project(p).to_json()})
    return 0


def _closed_form_max(model: Model) -> MaxResult:
    if isinstance(model, FullModel):
        argmax = Dist.uniform(model.space)
    elif isinstance(model, IndependenceModel) and len(set(model.space.cards)) == 1:
        argmax = independence_maximizers(model.space.n, model.space.cards[0], limit=1)[0]
    elif isinstance(model, PartitionModel):
        argmax = partition_maximizers(model.partition, limit=1)[0]
    else:
        raise UnsupportedError(f"no constructed maximizer for model kind {model.kind!r}; "
                               "use --method ascent or oracle")
    return MaxResult(argmax, model.divergence(argmax), "closed-form", 1, True)


def cmd_maximize(args) -> int:
    model = _model(args)
    _, _, asc = _configs(args)
    if args.method == "oracle":
        res = grid_oracle(model, GridSpec(args.resolution))
    elif args.method == "ascent":
        res = multistart_ascent(model, asc)
    else:
        res = _closed_form_max(model)
    _emit(args, {"model": model.to_json(), **res.to_json()})
    return 0


def model_bound(model: Model, lower: bool = False) -> BoundReport:
    """The bound (or exact value) this package knows for ``model``."""
    if lower:
        if model.dimension is None:
            raise UnsupportedError(f"model kind {model.kind!r} is not an exponential family")
        return lower_bound_expfam(model.space.size, model.dimension)
    if isinstance(model, FullModel):
        return BoundReport(0.0, "exact", "full")
    if isinstance(model, IndependenceModel):
        cards = model.space.cards
        return exact_independence(len(cards), cards[0]) if len(set(cards)) == 1 else bound_independence(cards)
    if isinstance(model, PartitionModel):
        return exact_partition(model.partition)
    if isinstance(model, MPDModel):
        return mpd_exact(model.rho)
    if isinstance(model, MultinomialModel):
        return exact_multinomial(model.n, model.q)
    if isinstance(model, MixtureModel):
        return bound_mixture(model.space.cards, model.k)
    if isinstance(model, RBMModel):
        return bound_rbm((2,) * model.n, (2,) * model.m)
    if isinstance(model, DBNModel):
        if len(set(model.widths)) != 1:
            raise DomainError(f"DBN bound needs equal layer widths, got {list(model.widths)}")
        return bound_dbn((2,) * model.widths[0], len(model.widths))
    if isinstance(model, UMPDModel):
        return bound_umpd(model.n, model.k)
    if isinstance(model, UnionPartitionModel):
        return bound_union_partitions(model.n, model.k)
    raise UnsupportedError(f"no bound for model kind {model.kind!r}")


def cmd_bound(args) -> int:
    model = _model(args)
    _emit(args, {"model": model.to_json(), **model_bound(model, args.lower).to_json()})
    return 0


def _parse_range(text: str) -> range:
    try:
        lo, _, hi = text.partition(":")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise InputError(f"range: expected 'lo:hi' integers, got {text!r}") from None
    if hi < lo:
        raise InputError(f"range: empty range {text!r}")
    return range(lo, hi + 1)


def _umpd_param_count(n: int, k: int):
    """Largest dimension among the k-block subcube mixtures (enumerated, small n only)."""
    if n > 4:
        return None
    rhos = enumerate_subcube_partitions(n, k)
    return max(MPDModel(rho).dimension for rho in rhos) if rhos else None


def sweep_rows(family: str, n: int, sizes: range, q: int = 2) -> list[dict]:
    """Rows ``(family, n, size, param_count, bound)``.

    ``size`` is the number of variables for independence, mixture components
    ``k``, hidden units ``m``, DBN layers ``L``, or union blocks ``k``.
    """
    if family not in FAMILIES:
        raise InputError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
    if q != 2 and family in ("umpd", "union-partitions"):
        raise UnsupportedError(f"{family} is defined for binary variables only")
    rows = []
    for s in sizes:
        bound, count = None, None
        try:
            if family == "independence":
                cards = (q,) * s
                bound = bound_independence(cards).value
                count = param_count("independence", cards=cards)
            elif family == "mixture":
                cards = (q,) * n
                bound = bound_mixture(cards, s).value
                count = param_count("mixture", cards=cards, k=s)
            elif family == "rbm":
                bound = bound_rbm((q,) * n, (2,) * s).value
                count = param_count("rbm", n=n, m=s) if q == 2 else None
            elif family == "dbn":
                bound = bound_dbn((q,) * n, s).value
                count = param_count("dbn", widths=(n,) * s) if q == 2 else None
            elif family == "umpd":
                bound = bound_umpd(n, s).value
                count = _umpd_param_count(n, s)
            else:
                bound = bound_union_partitions(n, s).value
                count = s - 1
        except DomainError:
            pass
        rows.append({"family": family, "n": s if family == "independence" else n, "size": s,
                     "param_count": count, "bound": bound})
    return rows


def cmd_sweep(args) -> int:
    rows = sweep_rows(args.family, args.n, _parse_range(args.range), args.q)
    factor, unit = (1.0 / LN2, "bits") if args.bits else (1.0, "nats")
    col = f"bound_{unit}"
    table = [{"family": r["family"], "n": r["n"], "size": r["size"], "param_count": r["param_count"],
              col: None if r["bound"] is None else r["bound"] * factor}
             for r in rows]
    if args.format == "json":
        text = json.dumps(table, indent=2) + "\n"
    else:
        text = _render_csv(table)
    _write(args, text)
    return 0


def cmd_verify(args) -> int:
    em, net, _ = _configs(args)
    cfg = SuiteConfig(seed=args.seed, resolution=args.resolution, net=net, em=em)
    checks = run_suite(args.suite, cfg)
    ok = all(c.passed for c in checks)
    report = {"suite": args.suite, "pass": ok, "checks": [c.to_json() for c in checks]}
    if args.format == "csv":
        _emit(args, report["checks"])
    else:
        _emit(args, report)
    return 0 if ok else 1


# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $DIVMAX_SEED or 0)")
    units = common.add_mutually_exclusive_group()
    units.add_argument("--nats", dest="bits", action="store_false", help="report divergences in nats (default)")
    units.add_argument("--bits", dest="bits", action="store_true", help="report divergences in bits")
    common.set_defaults(bits=False)
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default: csv for sweep, json otherwise)")
    common.add_argument("--restarts", type=int, default=None, help="restart budget for iterative routines")
    common.add_argument("--max-iters", type=int, default=None, help="iteration cap for iterative routines")
    common.add_argument("--out", default=None, help="write output to this file instead of stdout")

    parser = argparse.ArgumentParser(prog="divmax", description="Maximal KL divergence from statistical models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("project", parents=[common], help="project a distribution onto a model")
    p.add_argument("dist", help="distribution JSON (file path or inline)")
    p.add_argument("model", help="model JSON (file path or inline)")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("maximize", parents=[common], help="maximize the divergence from a model")
    p.add_argument("model", help="model JSON (file path or inline)")
    p.add_argument("--method", choices=("ascent", "oracle", "closed-form"), default="ascent")
    p.add_argument("--resolution", type=int, default=32, help="grid denominator for --method oracle")
    p.set_defaults(func=cmd_maximize)

    p = sub.add_parser("bound", parents=[common], help="closed-form bound on the maximal divergence")
    p.add_argument("model", help="model JSON (file path or inline)")
    p.add_argument("--lower", action="store_true", help="exponential-family lower bound instead")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", parents=[common], help="tabulate bounds against model size")
    p.add_argument("family", choices=FAMILIES)
    p.add_argument("--n", type=int, default=4, help="number of visible variables (layer width for dbn)")
    p.add_argument("--q", type=int, default=2, help="states per visible variable")
    p.add_argument("--range", default="1:8", help="inclusive size range lo:hi")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", parents=[common], help="run a self-check suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--resolution", type=int, default=16, help="grid denominator for the bounds suite")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.seed is None:
            args.seed = _seed_default()
        if args.format is None:
            args.format = "csv" if args.command == "sweep" else "json"
        return args.func(args)
    except (DivmaxError, ValueError, OSError) as e:
        print(f"divmax: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
