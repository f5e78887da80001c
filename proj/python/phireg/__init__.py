"""Nonsmooth convex solver with certified inexact prox evaluations.

Thin convenience layer over the compiled core: JSON-string interfaces are
decoded into plain dicts here.
"""
from __future__ import annotations

import json
from typing import Any

try:
    from . import _core
except ImportError:  # in-tree runs import the module straight from the build dir
    import _core  # type: ignore

Problem = _core.Problem
Regularizer = _core.Regularizer
EnvelopeValue = _core.EnvelopeValue
ProxCertificate = _core.ProxCertificate

make_problem_suite = _core.make_problem_suite
make_abs_problem = _core.make_abs_problem
make_l1_problem = _core.make_l1_problem
make_maxq_problem = _core.make_maxq_problem
make_max_affine_problem = _core.make_max_affine_problem
make_composite_problem = _core.make_composite_problem
make_quadratic_problem = _core.make_quadratic_problem
exact_envelope = _core.exact_envelope
inexact_prox = _core.inexact_prox
lipschitz_of_envelope = _core.lipschitz_of_envelope
run_criterion = _core.run_criterion


def problem_from_dict(doc: dict[str, Any]) -> Problem:
    return _core.problem_from_json(json.dumps(doc))


def solve(problem: Problem, reg: Regularizer, x0, solver: dict[str, Any] | None = None):
    """Returns (summary dict, list of per-iteration record dicts)."""
    summary, trace = _core.solve(problem, reg, x0, json.dumps(solver) if solver else "")
    records = [json.loads(line) for line in trace.splitlines() if line]
    return json.loads(summary), records


def rate(problem: Problem, reg: Regularizer, x0, solver: dict[str, Any] | None = None):
    return json.loads(_core.rate(problem, reg, x0, json.dumps(solver) if solver else ""))


def optimality_report(problem: Problem, reg: Regularizer, x, tol: float = 1e-8):
    return json.loads(_core.optimality_report(problem, reg, x, tol))


def lipschitz_probe(problem: Problem, reg: Regularizer, n_pairs: int = 1000,
                    lo: float = -5.0, hi: float = 5.0, seed: int = 12345):
    return json.loads(_core.lipschitz_probe(problem, reg, n_pairs, lo, hi, seed))


def verify_prox_certificate(problem: Problem, reg: Regularizer, x, epsilon: float,
                            exact_tol: float = 1e-10):
    return json.loads(_core.verify_lemma2(problem, reg, x, epsilon, exact_tol))
