"""Task execution for problem files."""

import logging
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

from mukai_fixed.config import (
    DEFAULT_ORACLE_CHARGES,
    DEFAULT_ORACLE_PROBLEMS,
    DEFAULT_ORACLE_SEED,
    DEFAULT_TERMS,
    SUPPORT_MIN_SQUARE,
)
from mukai_fixed.enumeration import (
    FiberProblem,
    brute_force_fiber,
    certified_radius,
    enumerate_fiber,
)
from mukai_fixed.eta import euler_char_fixed, frameshape_eta_product, series_invert
from mukai_fixed.exceptions import EnumerationError, ValidationError, VerificationError
from mukai_fixed.group_action import (
    GroupAction,
    Isometry,
    frameshape_of,
    generate_group,
    parse_frameshape,
)
from mukai_fixed.lattice import Lattice, Vector, identity_matrix, integer_rank
from mukai_fixed.moduli import dual_orbits, fixed_locus_report, verify_equivalence_data
from mukai_fixed.oracle import run_oracle
from mukai_fixed.problem import ProblemFile, TaskSpec
from mukai_fixed.stability import (
    CentralCharge,
    GeometricCharge,
    charge_from_omega_beta,
    evaluate,
    in_distinguished_domain,
    is_G_sigma_generic,
    spans_positive_plane,
)
from mukai_fixed.utils import (
    format_signature,
    format_vector,
    parse_combination,
    parse_vector,
    to_jsonable,
)

logger = logging.getLogger(__name__)

# Largest box (in points) the --oracle cross-check of a fiber task will scan.
ORACLE_SCAN_LIMIT = 200_000


@dataclass
class TaskResult:
    """Result of running a single task."""

    kind: str
    name: str
    data: dict[str, Any]
    passed: bool = True
    messages: list[str] = field(default_factory=list)
    elapsed: float = 0.0


@dataclass
class RunReport:
    """Results of every task of one problem, in file order."""

    problem: str
    results: list[TaskResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def exit_status(self) -> int:
        return 0 if self.passed else 1

    def to_dict(self) -> dict[str, Any]:
        """JSON form; timings are left out so the output is byte-stable."""
        return {
            "problem": self.problem,
            "passed": self.passed,
            "tasks": [
                {
                    "kind": r.kind,
                    "name": r.name,
                    "passed": r.passed,
                    "messages": r.messages,
                    "data": r.data,
                }
                for r in self.results
            ],
        }


Handler = Callable[[ProblemFile | None, dict[str, Any], bool], tuple[dict[str, Any], list[str]]]


def _need_problem(problem: ProblemFile | None, kind: str) -> ProblemFile:
    if problem is None:
        raise ValidationError(f"A {kind} task needs a problem file")
    return problem


def _run_verify(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    data = _need_problem(problem, "verify").require_equivalence()
    report = verify_equivalence_data(data)
    failures = [f"{c.name}: {c.detail}" for c in report.failures]
    return {
        "passed": report.passed,
        "checks": {c.name: c.passed for c in report.checks},
        "q_map": report.q_map,
    }, failures


def _frameshape_entry(symbol: str, fs_text: str) -> dict[str, Any]:
    fs = parse_frameshape(fs_text)
    return {"element": symbol, "frameshape": fs.render(), "weight": fs.weight, "order": fs.order}


def _run_frameshape(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    entries = []
    if "action" in params:
        action = _need_problem(problem, "frameshape").action(params["action"])
        elements = action.elements if params.get("all_elements") else action.generators
        for g in elements:
            if g.is_identity():
                continue
            entries.append(_frameshape_entry(g.label or "g", frameshape_of(g).render()))
    else:
        for symbol in params.get("symbols", []):
            entries.append(_frameshape_entry(symbol, symbol))
    if not entries:
        raise ValidationError("A frameshape task needs an action or a list of symbols")
    return {
        "frameshapes": [e["frameshape"] for e in entries],
        "weights": [e["weight"] for e in entries],
        "orders": [e["order"] for e in entries],
        "entries": entries,
    }, []


def _run_euler(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    if "frameshape" not in params:
        raise ValidationError("An euler task needs a frameshape")
    fs = parse_frameshape(str(params["frameshape"]))
    terms = int(params.get("terms", DEFAULT_TERMS))
    if terms < 1:
        raise ValidationError(f"terms must be positive, got {terms}")
    inverse = series_invert(frameshape_eta_product(fs, terms))
    data: dict[str, Any] = {
        "frameshape": fs.render(),
        "offset": inverse.offset,
        "coefficients": list(inverse.coeffs[:terms]),
        "series": inverse.render(terms),
    }
    if "v_square" in params:
        data["euler_characteristic"] = euler_char_fixed(fs, int(params["v_square"]))
        # valid for a smooth moduli space of dimension v^2 + 2 with a cyclic symplectic action
        data["conditional"] = True
    return data, []


def _orbit_generators(problem: ProblemFile, name: str, lattice: Lattice) -> Sequence[Isometry]:
    if name == "dual":
        generators = problem.require_equivalence().dual_generators
    else:
        generators = problem.action(name).generators
    for g in generators:
        if g.ambient.gram != lattice.gram:
            raise ValidationError(f"Orbit action {name!r} does not act on the fiber lattice")
    return generators


def _fiber_problem(problem: ProblemFile, params: dict[str, Any]) -> FiberProblem:
    min_square = int(params.get("min_square", SUPPORT_MIN_SQUARE))
    max_square = params.get("max_square")
    max_square = None if max_square is None else int(max_square)
    if "vector" in params:
        data = problem.require_equivalence()
        v = parse_vector(params["vector"], data.lattice)
        return FiberProblem(
            source=data.lattice_prime,
            map=data.p_map,
            target=v,
            min_square=min_square,
            max_square=max_square,
        )
    if "lattice" not in params:
        raise ValidationError("A fiber task needs a lattice or a vector")
    lattice = problem.lattice(params["lattice"])
    rows = tuple(tuple(int(x) for x in row) for row in params.get("map", []))
    target = tuple(int(x) for x in params.get("target", []))
    return FiberProblem(
        source=lattice, map=rows, target=target, min_square=min_square, max_square=max_square
    )


def _oracle_fiber(fiber: FiberProblem, vectors: Sequence[Vector]) -> tuple[str, bool]:
    try:
        radius = certified_radius(fiber)
    except EnumerationError as e:
        return f"oracle skipped: {e}", True
    rows, _ = fiber.stacked()
    k = fiber.source.rank - integer_rank(rows, fiber.source.rank)
    if (2 * radius + 1) ** max(k, 0) > ORACLE_SCAN_LIMIT:
        return f"oracle skipped: box of radius {radius} in rank {k} is too large", True
    scan = brute_force_fiber(fiber, radius)
    agree = scan.exhaustive and set(scan.vectors) == set(vectors)
    return f"oracle scan of radius {radius}: {'agrees' if agree else 'DISAGREES'}", agree


def _run_fiber(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    problem = _need_problem(problem, "fiber")
    fiber = _fiber_problem(problem, params)
    result = enumerate_fiber(fiber)
    data: dict[str, Any] = {
        "count": len(result.vectors),
        "by_square": result.by_square(fiber.source),
        "kernel_rank": result.stats.kernel_rank,
    }
    if params.get("orbits"):
        generators = _orbit_generators(problem, params["orbits"], fiber.source)
        orbits = dual_orbits(result.vectors, generators)
        data["orbits"] = len(orbits)
        data["orbit_sizes"] = sorted({len(members) for _, members in orbits})
        data["representatives"] = [rep for rep, _ in orbits]
    elif params.get("list"):
        data["vectors"] = list(result.vectors)
    messages = []
    if oracle or params.get("oracle"):
        message, agree = _oracle_fiber(fiber, result.vectors)
        data["oracle_agrees"] = agree
        messages.append(message)
        if not agree:
            raise VerificationError(message)
    return data, messages


def _run_fixed_locus(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    data = _need_problem(problem, "fixed-locus").require_equivalence()
    if "vector" not in params:
        raise ValidationError("A fixed-locus task needs a vector")
    v = parse_vector(params["vector"], data.lattice)
    decompositions = None
    if "decompositions" in params:
        decompositions = [
            [parse_vector(u, data.lattice) for u in parts] for parts in params["decompositions"]
        ]
    report = fixed_locus_report(data, v, decompositions, verify=params.get("verify", True))
    profile = [
        {
            "label": c.label,
            "square": c.square,
            "dimension": c.dimension,
            "census": {format_signature(sig): n for sig, n in c.census},
            "sym_power": c.sym_power,
            "count": c.count,
            "divisibility_one": c.divisibility_one,
            "stability": c.stability,
        }
        for c in report.profile
    ]
    return {
        "vector": format_vector(report.vector, data.lattice),
        "profile": profile,
        "profile_counts": [c.count for c in report.profile],
        "divisibility_one": sum(c.divisibility_one for c in report.profile),
        "components": len(report.records),
        "support_size": report.support_size,
        "group_order": report.group_order,
        "dual_order": report.dual_order,
        "summary": report.summary,
        "notes": report.notes,
    }, []


def _charge_lattice(problem: ProblemFile | None, params: dict[str, Any]) -> Lattice:
    problem = _need_problem(problem, "charge")
    if "lattice" in params:
        lattice = problem.lattice(params["lattice"])
    else:
        lattice = problem.require_equivalence().lattice
    if lattice.ns is None:
        raise ValidationError(f"{lattice.describe()} is not a Mukai lattice")
    return lattice


def _geometric_charge(lattice: Lattice, params: dict[str, Any]) -> CentralCharge:
    assert lattice.ns is not None
    if "omega" not in params:
        raise ValidationError("A charge needs omega")
    omega = parse_combination(str(params["omega"]), lattice.ns)
    beta = parse_combination(str(params.get("beta", "0")), lattice.ns)
    z = charge_from_omega_beta(GeometricCharge(lattice.ns, omega, beta))
    return CentralCharge(lattice, z.re, z.im)


def _group_for(
    problem: ProblemFile | None, params: dict[str, Any], lattice: Lattice
) -> GroupAction:
    if problem is not None and "action" in params:
        return problem.action(params["action"])
    if problem is not None and problem.equivalence is not None and "lattice" not in params:
        return problem.equivalence.group
    return generate_group([Isometry(lattice, identity_matrix(lattice.rank))], label="trivial")


def _run_genericity(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    lattice = _charge_lattice(problem, params)
    z = _geometric_charge(lattice, params)
    if "vector" not in params:
        raise ValidationError("A genericity task needs a vector")
    v = parse_vector(params["vector"], lattice)
    group = _group_for(problem, params, lattice)
    min_square = params.get("min_square", SUPPORT_MIN_SQUARE)
    result = is_G_sigma_generic(z, v, group, None if min_square is None else int(min_square))
    domain = in_distinguished_domain(z)
    data: dict[str, Any] = {
        "vector": format_vector(v, lattice),
        "generic": result.generic,
        "splittings": len(result.splittings),
        "in_domain": domain.inside,
    }
    if result.witness is not None:
        data["witness"] = {
            "v0": result.witness.v0,
            "v1": result.witness.v1,
            "t": result.witness.t,
        }
    if domain.witness is not None:
        data["domain_witness"] = domain.witness
    return data, []


def _run_charge(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    lattice = _charge_lattice(problem, params)
    z = _geometric_charge(lattice, params)
    values = {}
    for expr in params.get("vectors", []):
        values[expr] = evaluate(z, parse_vector(expr, lattice))
    positive = spans_positive_plane(z)
    data: dict[str, Any] = {
        "re": z.re,
        "im": z.im,
        "values": values,
        "positive_plane": positive,
    }
    if positive:
        data["in_domain"] = in_distinguished_domain(z).inside
    return data, []


def _run_oracle(
    problem: ProblemFile | None, params: dict[str, Any], oracle: bool
) -> tuple[dict[str, Any], list[str]]:
    summary = run_oracle(
        seed=int(params.get("seed", DEFAULT_ORACLE_SEED)),
        problems=int(params.get("problems", DEFAULT_ORACLE_PROBLEMS)),
        charges=int(params.get("charges", DEFAULT_ORACLE_CHARGES)),
        planted=params.get("planted"),
    )
    data = {
        "fiber_problems": summary.fiber_problems,
        "charges": summary.charges,
        "planted": summary.planted,
        "boxed_charges": summary.boxed_charges,
        "disagreements": summary.disagreements,
        "passed": summary.passed,
    }
    if not summary.passed:
        raise VerificationError(f"{len(summary.disagreements)} oracle disagreements")
    return data, []


HANDLERS: dict[str, Handler] = {
    "verify": _run_verify,
    "frameshape": _run_frameshape,
    "euler": _run_euler,
    "fiber": _run_fiber,
    "fixed-locus": _run_fixed_locus,
    "genericity": _run_genericity,
    "charge": _run_charge,
    "oracle": _run_oracle,
}


def _matches(expected: Any, actual: Any) -> bool:
    """Whether every field of `expected` is present in `actual` with the same value."""
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return False
        return all(k in actual and _matches(v, actual[k]) for k, v in expected.items())
    if isinstance(expected, list):
        if not isinstance(actual, list) or len(expected) != len(actual):
            return False
        return all(_matches(e, a) for e, a in zip(expected, actual, strict=True))
    return bool(expected == actual)


def _mismatches(expected: dict[str, Any], actual: dict[str, Any]) -> list[str]:
    return [
        f"expected {key} = {value!r}, got {actual.get(key)!r}"
        for key, value in sorted(expected.items())
        if key not in actual or not _matches(value, actual[key])
    ]


def execute_task(problem: ProblemFile | None, task: TaskSpec, oracle: bool = False) -> TaskResult:
    """Run one task and compare it with its expectations.

    Verification failures and mismatched expectations are recorded in the
    result; any other library error propagates.

    Args:
        problem: The problem the task refers to (None for standalone tasks).
        task: The task.
        oracle: Force brute-force cross-checks where the task supports them.

    Returns:
        The result, with `passed` False on a failed check.

    Raises:
        MukaiFixedError: If the task input is invalid.
    """
    handler = HANDLERS.get(task.kind)
    if handler is None:
        raise ValidationError(f"Unknown task kind {task.kind!r}")
    logger.info("Running %s task %s", task.kind, task.name)
    start = time.perf_counter()
    try:
        data, messages = handler(problem, task.params, oracle)
        result = TaskResult(task.kind, task.name, to_jsonable(data), messages=messages)
        if task.kind == "verify" and messages:
            result.passed = False
    except VerificationError as e:
        result = TaskResult(task.kind, task.name, {}, passed=False, messages=[str(e)])
    if task.expect is not None and result.data:
        mismatches = _mismatches(to_jsonable(task.expect), result.data)
        if mismatches:
            result.passed = False
            result.messages.extend(mismatches)
    result.elapsed = time.perf_counter() - start
    return result


def run_problem(
    problem: ProblemFile, oracle: bool = False, only: Sequence[str] | None = None
) -> RunReport:
    """Run the tasks of a problem in file order.

    Args:
        problem: The parsed problem.
        oracle: Force brute-force cross-checks.
        only: Restrict to the tasks with these names.
    """
    report = RunReport(problem=problem.name)
    for task in problem.tasks:
        if only is not None and task.name not in only:
            continue
        report.results.append(execute_task(problem, task, oracle))
    return report
