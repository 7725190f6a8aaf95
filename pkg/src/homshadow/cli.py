"""Command line interface.

Exit codes: 0 on success, 1 when the input is malformed or fails validation,
2 when a size budget is exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .dsl import DSLError
from .graphs import GraphError
from .hp_graph import StateBudgetExceeded, to_dot
from .pipeline import (
    ProblemSpec,
    ValidationFailure,
    analyse,
    compute_darkness_limit,
    compute_shadow_limit,
    successive_distances,
    verify_convergence,
)
from .polytope import EnumerationTooLarge, hausdorff_to_shadow
from .shadows import ball_mass, darkness_measure, parametrized_shadow
from .spectral.field import to_json
from .svg import render_svg
from .words import LengthBudgetExceeded, apply_automorphism

log = logging.getLogger("homshadow")

BUDGET_ERRORS = (LengthBudgetExceeded, StateBudgetExceeded, EnumerationTooLarge)
INPUT_ERRORS = (DSLError, GraphError, ValidationFailure, ValueError)


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load(args) -> ProblemSpec:
    text = Path(args.input).read_text(encoding="utf-8")
    spec = ProblemSpec.from_text(text, assume_hypotheses=args.assume_hypotheses)
    if args.length == "file":
        if not args.length_file:
            raise ValidationFailure("--length file needs --length-file")
        vals = [Fraction(t) for t in Path(args.length_file).read_text().split()]
        if len(vals) != spec.phi.graph.n_edges or any(v <= 0 for v in vals):
            raise ValidationFailure("need one positive length per edge")
        spec.length = vals
    elif args.length is not None:
        spec.length = args.length
    return spec


def _k(args, spec: ProblemSpec) -> int:
    return args.k if args.k is not None else spec.iterations[1]


def cmd_shadow(args, out: Path) -> dict:
    spec = _load(args)
    a = analyse(spec)
    P = compute_shadow_limit(spec)
    res = {"limit": P.to_json(), "power": a.power, "scalar": to_json(a.scalar)}
    if args.k:
        k = args.k
        objs, scales = [P], [1]
        res["iterates"] = []
        for x in spec.seeds:
            w = apply_automorphism(a.automorphism, x, k)
            sh = parametrized_shadow(w, dim=a.automorphism.rank)
            res["iterates"].append({"seed": str(x), "k": k, "length": len(w), "hausdorff": hausdorff_to_shadow(P, sh, k)})
            objs.append(sh)
            scales.append(k)
        (out / "shadow.svg").write_text(render_svg(objs, scales=scales), encoding="utf-8")
    _dump(res, out / "shadow.json")
    return res


def cmd_darkness(args, out: Path) -> dict:
    spec = _load(args)
    a = analyse(spec)
    D = compute_darkness_limit(spec)
    res = {"limit": D.to_json()}
    if args.k:
        k = args.k
        res["iterates"] = []
        for x in spec.seeds:
            w = apply_automorphism(a.automorphism, x, k)
            mu = darkness_measure(w, a.length_function(), k, dim=a.automorphism.rank)
            masses = {str(r): float(ball_mass(mu, D.approx, r)) for r in (0.05, 0.1, 0.2)}
            res["iterates"].append({"seed": str(x), "k": k, "ball_masses": masses})
    _dump(res, out / "darkness.json")
    return res


def cmd_polytope(args, out: Path) -> dict:
    spec = _load(args)
    a = analyse(spec)
    res = {
        "power": a.power,
        "hp_shadow": a.graph_shadow.to_json(),
        "free_group_shadow": compute_shadow_limit(spec).to_json(),
    }
    if args.sigma:
        res["sigma1"] = a.sigma.to_json()
    _dump(res, out / "polytope.json")
    return res


def cmd_hpgraph(args, out: Path) -> dict:
    spec = _load(args)
    a = analyse(spec, check=False)
    H = a.hp
    W = None
    if a.report.valid:
        W = a.weights
    (out / "hpgraph.dot").write_text(to_dot(H, W), encoding="utf-8")
    res = {
        "power": a.power,
        "vertices": list(a.psi.graph.edge_names),
        "edges": [
            {"source": h.source, "target": h.target, "label": [to_json(x) for x in h.label]} for h in H.edges
        ],
    }
    if W is not None:
        res["mu"] = [to_json(m) for m in W.mu]
        res["pi"] = [to_json(p) for p in W.pi]
        res["darkness_point"] = a.graph_darkness.to_json()
    _dump(res, out / "hpgraph.json")
    return res


def cmd_verify(args, out: Path) -> dict:
    spec = _load(args)
    a = analyse(spec, check=False)
    try:
        a.check()
    except ValidationFailure as exc:
        # without a train track only the self-consistency of the iterates can be tested
        log.info("no exact limit available (%s); running the successive-difference check", exc)
        res = {"train_track": False, "reason": str(exc), "seeds": []}
        for x in spec.seeds:
            ws, d = successive_distances(a.automorphism, x, _k(args, spec))
            tail = d[2:]
            res["seeds"].append(
                {
                    "seed": str(x),
                    "word_lengths": [len(w) for w in ws],
                    "successive_hausdorff": d,
                    "decreasing_after_burn_in": all(q < p for p, q in zip(tail, tail[1:])),
                }
            )
        _dump(res, out / "verify.json")
        return res
    reports = verify_convergence(spec, _k(args, spec))
    res = {"train_track": True, "reports": []}
    for r in reports:
        js = r.to_json()
        if not args.timings:
            js.pop("runtimes")
        res["reports"].append(js)
    _dump(res, out / "verify.json")
    return res


def cmd_figures(args, out: Path) -> dict:
    spec = _load(args)
    a = analyse(spec, check=False)
    f = a.automorphism
    K = args.k or 6
    res = {"seeds": []}
    for x in spec.seeds:
        ws, d = successive_distances(f, x, K)
        for k, w in enumerate(ws, start=1):
            sh = parametrized_shadow(w, dim=f.rank)
            name = f"shadow_{x}_{k}.svg"
            (out / name).write_text(render_svg([sh], scales=[k], title=f"k = {k}"), encoding="utf-8")
        res["seeds"].append({"seed": str(x), "word_lengths": [len(w) for w in ws], "successive_hausdorff": d})
    _dump(res, out / "figures.json")
    return res


COMMANDS = {
    "shadow": (cmd_shadow, "limit shadow polytope"),
    "darkness": (cmd_darkness, "limit darkness point"),
    "polytope": (cmd_polytope, "shadow polytope of the half-point graph"),
    "hpgraph": (cmd_hpgraph, "half-point graph as DOT and JSON"),
    "verify": (cmd_verify, "convergence report for the iterates"),
    "figures": (cmd_figures, "SVG shadows of the first iterates"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="homshadow", description="Shadows of free group automorphisms.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        p.add_argument("--input", required=True, help="problem file")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--k", type=int, default=None, help="iteration count")
        p.add_argument("--length", choices=("unit", "train", "file"), default=None)
        p.add_argument("--length-file", default=None, help="edge lengths, one rational per edge")
        p.add_argument(
            "--assume-hypotheses",
            action="store_true",
            help="proceed even if the abelianization has infinite order",
        )
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "verify":
            p.add_argument("--timings", action="store_true", help="include runtimes in the report")
        if name == "polytope":
            p.add_argument("--sigma", action="store_true", help="also list the vertices of the cycle simplex")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command][0](args, out)
    except INPUT_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except BUDGET_ERRORS as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return 2
    log.info("%s finished in %.2fs", args.command, time.perf_counter() - t0)
    return 0


if __name__ == "__main__":
    sys.exit(main())
