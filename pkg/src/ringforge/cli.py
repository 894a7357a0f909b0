"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 no convergence, 4 singular Hessian
during continuation, 5 verification tolerance exceeded.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .elliptic import EllipticContext
from .functional import BoundaryConditions, BoundaryError
from .grid import (GridError, QuadComplex, build_even_sublattice, build_from_mask, build_rectangle,
                   even_sublattice_corners, ab_to_mn, mn_to_ab)
from .layout import PROJECTIONS, LayoutError, export_json, export_svg, realize
from .pattern import Geometry, RingState, flower_residuals, q4_residuals
from .solver import (HessianSingularError, Problem, SolveOptions, continuation, default_steps,
                     sinh_gordon_order_check, solve)
from .solver.continuation import hessian_spectrum

EXIT_OK, EXIT_INVALID, EXIT_NO_CONVERGENCE, EXIT_SINGULAR, EXIT_TOLERANCE = 0, 2, 3, 4, 5

VERIFY_TOL = 1e-8

log = logging.getLogger("ringforge")


class SpecError(ValueError):
    pass


@dataclass
class ProblemSpec:
    geometry: Geometry
    q: float
    grid: dict
    bvp: str
    boundary: dict
    angle_unit: str = "radian"
    solver: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, doc: dict) -> "ProblemSpec":
        if not isinstance(doc, dict):
            raise SpecError("problem file must hold a JSON object")
        try:
            geometry = Geometry(doc["geometry"])
            q = float(doc["q"])
            grid = dict(doc["grid"])
            bvp = str(doc.get("bvp", "neumann"))
        except KeyError as exc:
            raise SpecError(f"missing field {exc.args[0]!r}") from None
        except ValueError as exc:
            raise SpecError(str(exc)) from None
        if bvp not in ("neumann", "dirichlet"):
            raise SpecError(f"bvp must be 'neumann' or 'dirichlet', got {bvp!r}")
        unit = doc.get("angle_unit", "radian")
        if unit not in ("radian", "pi"):
            raise SpecError(f"angle_unit must be 'radian' or 'pi', got {unit!r}")
        if not 0.0 < q <= 1.0:
            raise SpecError(f"q must lie in (0, 1], got {q}")
        return cls(geometry, q, grid, bvp, dict(doc.get("boundary", {})), unit,
                   dict(doc.get("solver", {})), doc)

    # -- assembly -------------------------------------------------------------

    def build_complex(self) -> QuadComplex:
        kind = self.grid.get("type", "rectangle")
        if kind == "rectangle":
            return build_rectangle(int(self.grid["M"]), int(self.grid["N"]))
        if kind == "even_sublattice":
            return build_even_sublattice(int(self.grid["M"]), int(self.grid["N"]))
        if kind == "mask":
            return build_from_mask(tuple(c) for c in self.grid["cells"])
        raise SpecError(f"unknown grid type {kind!r}")

    def _vertex(self, entry: dict):
        if "mn" in entry:
            return mn_to_ab(*entry["mn"])
        if "ab" in entry:
            return tuple(int(x) for x in entry["ab"])
        raise SpecError(f"boundary entry {entry} needs 'mn' or 'ab'")

    def _angle(self, x) -> float:
        return float(x) * (math.pi if self.angle_unit == "pi" else 1.0)

    def boundary_conditions(self, cx: QuadComplex) -> BoundaryConditions:
        b = self.boundary
        orient = {self._vertex(e): int(e["sign"]) for e in b.get("orientation", [])}
        boundary = [cx.vertices[i] for i in cx.boundary_indices]
        if self.bvp == "neumann":
            by_val = {int(k): self._angle(v) for k, v in b.get("theta_by_valence", {}).items()}
            theta = {v: by_val[cx.valence(v)] for v in boundary if cx.valence(v) in by_val}
            if "corners" in b:
                if self.grid.get("type") != "even_sublattice":
                    raise SpecError("'corners' needs an even_sublattice grid")
                corners = even_sublattice_corners(int(self.grid["M"]), int(self.grid["N"]))
                if len(b["corners"]) != 4:
                    raise SpecError("'corners' must list four angles")
                theta.update({c: self._angle(a) for c, a in zip(corners, b["corners"])})
            for e in b.get("theta", []):
                theta[self._vertex(e)] = self._angle(e["value"])
            return BoundaryConditions("neumann", neumann_theta=theta, boundary_orientation=orient)
        values = {}
        if "dirichlet_default" in b:
            values = {v: float(b["dirichlet_default"]) for v in boundary}
        for e in b.get("dirichlet", []):
            values[self._vertex(e)] = float(e["u"])
        return BoundaryConditions("dirichlet", dirichlet_values=values, boundary_orientation=orient)

    def options(self, args=None, init=None) -> SolveOptions:
        kw = {k: self.solver[k] for k in ("grad_tol", "max_iter") if k in self.solver}
        if args is not None:
            if getattr(args, "tol", None) is not None:
                kw["grad_tol"] = args.tol
            if getattr(args, "max_iter", None) is not None:
                kw["max_iter"] = args.max_iter
        return SolveOptions(init=init, **kw)


def load_problem(path) -> tuple[ProblemSpec, QuadComplex, BoundaryConditions]:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from None
    spec = ProblemSpec.from_dict(doc)
    try:
        cx = spec.build_complex()
        if cx.n_edges == 0:
            raise SpecError("grid has no edges")
        bc = spec.boundary_conditions(cx)
        bc.validate(cx, None if spec.q == 1.0 else EllipticContext(spec.q))
    except (KeyError, TypeError) as exc:
        raise SpecError(f"malformed problem: {exc}") from None
    return spec, cx, bc


def _seeded_init(spec: ProblemSpec, cx: QuadComplex, seed: int | None):
    """Uniform start, or K + 0.1K uniform noise when a seed is given."""
    if seed is None:
        return None
    ctx = EllipticContext(spec.q)
    base = 1.0 if ctx.q1_mode else ctx.K
    rng = np.random.default_rng(seed)
    return base + 0.1 * base * rng.uniform(-1.0, 1.0, cx.n_vertices)


def solution_document(spec: ProblemSpec, cx: QuadComplex, state: RingState, report, **extra) -> dict:
    doc = {
        "problem": spec.raw,
        "geometry": state.geometry.value,
        "q": float(state.q),
        "vertices": [{"ab": list(v), "mn": list(ab_to_mn(*v)), "u": float(u)}
                     for v, u in zip(cx.vertices, state.u)],
        "report": report.to_dict(),
    }
    doc.update(extra)
    return doc


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(doc) -> str:
    return json.dumps(doc, indent=1) + "\n"


def load_solution(path) -> tuple[ProblemSpec, QuadComplex, BoundaryConditions, RingState]:
    try:
        doc = json.loads(Path(path).read_text())
        spec = ProblemSpec.from_dict(doc["problem"])
        cx = spec.build_complex()
        bc = spec.boundary_conditions(cx)
        by_vertex = {tuple(v["ab"]): float(v["u"]) for v in doc["vertices"]}
        u = np.array([by_vertex[v] for v in cx.vertices])
        q = float(doc["q"])
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path} is not valid JSON: {exc}") from None
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"malformed solution file: {exc}") from None
    return spec, cx, bc, RingState(spec.geometry, q, u)


# -- commands -------------------------------------------------------------------------

def cmd_solve(args) -> int:
    spec, cx, bc = load_problem(args.problem)
    state, report = solve(cx, spec.geometry, spec.q, bc,
                          spec.options(args, _seeded_init(spec, cx, args.seed)))
    _write(args.output, _dump(solution_document(spec, cx, state, report)))
    if not report.converged:
        print(f"no convergence: {report.message} (|grad| = {report.grad_norm:.3e})", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_continue(args) -> int:
    spec, cx, bc = load_problem(args.problem)
    from_q = 1.0 if args.from_q is None else args.from_q
    to_q = spec.q if args.to_q is None else args.to_q
    opts = spec.options(args)
    start, rep = solve(cx, spec.geometry, from_q, bc, opts)
    if not rep.converged:
        print(f"no convergence at the start modulus q = {from_q}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    steps = default_steps(from_q, to_q) if args.steps is None else args.steps
    trace: list = []
    try:
        state, report = continuation(start, cx, bc, to_q, steps, opts, trace)
    except HessianSingularError as exc:
        _write(args.output, _dump({"failure_q": exc.q, "message": str(exc),
                                   "trace": [_trace_entry(t) for t in trace]}))
        print(f"continuation stopped: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    doc = solution_document(spec, cx, state, report, trace=[_trace_entry(t) for t in trace])
    if from_q == to_q:
        doc["report"] = rep.to_dict()
    _write(args.output, _dump(doc))
    return EXIT_OK if report.converged else EXIT_NO_CONVERGENCE


def _trace_entry(step) -> dict:
    return {"q": step.q, "grad_norm": step.grad_norm, "negative_eigenvalues": step.negative_eigenvalues,
            "u": [float(x) for x in step.u]}


def cmd_layout(args) -> int:
    _, cx, _, state = load_solution(args.solution)
    layout = realize(state, cx)
    if args.format == "svg":
        projection = args.projection or ("poincare" if state.geometry is Geometry.HYPERBOLIC
                                         else "stereographic")
        _write(args.output, export_svg(layout, projection))
    else:
        _write(args.output, export_json(layout) + "\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    spec, cx, bc, state = load_solution(args.solution)
    tol = VERIFY_TOL if args.tol is None else args.tol
    problem = Problem(cx, state.geometry, state.q, bc, state.ctx)
    grad = problem.gradient(state.u)
    flower = flower_residuals(state, cx)
    q4 = q4_residuals(state, cx)
    rows = [
        ("gradient norm", float(np.max(np.abs(grad))), tol),
        ("max flower residual", float(np.max(np.abs(flower), initial=0.0)), tol),
        ("max Q4 residual", float(np.max(q4, initial=0.0)), tol),
    ]
    try:
        layout = realize(state, cx)
        rows.append(("max closure gap", layout.max_closure_gap, tol))
    except LayoutError as exc:
        print(f"layout failed: {exc}", file=sys.stderr)
        rows.append(("max closure gap", math.inf, tol))
    ok = all(value <= limit for _, value, limit in rows)
    if state.geometry is Geometry.HYPERBOLIC:
        ev = hessian_spectrum(problem, state.u)
        if ev is not None:
            lam = float(ev[0])
            print(f"{'Hessian min eigenvalue':<24} {lam: .3e}   (must be > 0)")
            ok = ok and lam > 0
    for name, value, limit in rows:
        print(f"{name:<24} {value: .3e}   tol {limit:.1e}   {'ok' if value <= limit else 'FAIL'}")
    return EXIT_OK if ok else EXIT_TOLERANCE


LIMIT_FIELDS = {
    "zero": (lambda x, y: 0.0, "u = 0"),
    "linear": (lambda x, y: 0.3 * x - 0.2 * y + 0.1, "u = 0.3x - 0.2y + 0.1"),
    "smooth": (lambda x, y: 0.3 * math.sin(x + 0.7) * math.cos(y), "u = 0.3 sin(x + 0.7) cos y"),
}


def cmd_limit_check(args) -> int:
    ok = True
    eps = (0.08, 0.04, 0.02, 0.01)
    for geometry in (Geometry.SPHERE, Geometry.HYPERBOLIC):
        for name, (f, label) in LIMIT_FIELDS.items():
            res = sinh_gordon_order_check(f, geometry, eps)
            orders = ", ".join("exact" if math.isinf(o) else f"{o:.3f}" for o in res.orders)
            print(f"{geometry.value:<11} {label:<28} orders: {orders}")
            ok = ok and res.order >= 1.0
    return EXIT_OK if ok else EXIT_TOLERANCE


# -- entry point ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ringforge", description="Orthogonal ring pattern solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a boundary value problem")
    p.add_argument("--problem", required=True)
    p.add_argument("--output", default="-")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=int, help="start from K plus seeded noise instead of K")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("continue", help="deform a solution in q")
    p.add_argument("--problem", required=True)
    p.add_argument("--output", default="-")
    p.add_argument("--from-q", type=float)
    p.add_argument("--to-q", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", type=int)
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("layout", help="realize a solution geometrically")
    p.add_argument("--solution", required=True)
    p.add_argument("--output", default="-")
    p.add_argument("--format", choices=("json", "svg"), default="json")
    p.add_argument("--projection", choices=PROJECTIONS)
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("verify", help="check residuals of a solution")
    p.add_argument("--solution", required=True)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("limit-check", help="measure convergence to the sinh-Gordon equations")
    p.set_defaults(func=cmd_limit_check)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("RINGFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecError, GridError, BoundaryError, LayoutError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
