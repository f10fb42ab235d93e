"""Problem files: named lattices, group actions, equivalence data and tasks.

A problem file is a JSON object::

    {
      "version": "1",
      "name": "genus2",
      "lattices": {"H": {"gram": [[2]], "names": ["H"]}, ...},
      "actions": {"G": {"lattice": "Lambda", "generators": [[[...]]]}},
      "equivalence": {"lambda": "Lambda", "lambda_prime": "LambdaP", ...},
      "tasks": [{"kind": "fixed-locus", "vector": "(0,2H,0)", "expect": {...}}]
    }

Lattice entries take one of the forms {"gram": ...}, {"standard": "E8"},
{"diagonal": [...]}, {"direct_sum": [...]}, {"mukai": name} or
{"rescale": name, "by": n}, optionally with "label", "names" and "classes".
"""

import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

from mukai_fixed.config import FORMAT_VERSION, SHIPPED_FIXTURES
from mukai_fixed.exceptions import MukaiFixedError, ProblemFileError
from mukai_fixed.group_action import GroupAction, Isometry, generate_group
from mukai_fixed.lattice import (
    Lattice,
    a1,
    diagonal,
    direct_sum,
    e8,
    hyperbolic_plane,
    mukai_lattice,
    rescale,
)
from mukai_fixed.moduli import EquivalenceData
from mukai_fixed.utils import canonical_json, parse_vector

logger = logging.getLogger(__name__)

TASK_KINDS = (
    "verify",
    "frameshape",
    "euler",
    "fiber",
    "fixed-locus",
    "genericity",
    "charge",
    "oracle",
)

_LATTICE_FORMS = ("gram", "standard", "diagonal", "direct_sum", "mukai", "rescale")


@dataclass(frozen=True)
class TaskSpec:
    """One task of a problem file."""

    kind: str
    name: str
    params: dict[str, Any]
    expect: dict[str, Any] | None = None


@dataclass
class ProblemFile:
    """A parsed and validated problem file."""

    version: str
    name: str
    lattices: dict[str, Lattice]
    actions: dict[str, GroupAction]
    equivalence: EquivalenceData | None
    tasks: list[TaskSpec]
    description: str = ""
    source: Path | None = None
    raw: dict[str, Any] = field(default_factory=dict, repr=False)

    def lattice(self, name: str) -> Lattice:
        if name not in self.lattices:
            raise ProblemFileError(f"Unknown lattice {name!r}")
        return self.lattices[name]

    def action(self, name: str) -> GroupAction:
        if name not in self.actions:
            raise ProblemFileError(f"Unknown action {name!r}")
        return self.actions[name]

    def require_equivalence(self) -> EquivalenceData:
        if self.equivalence is None:
            raise ProblemFileError(f"Problem {self.name!r} has no equivalence section")
        return self.equivalence


def _require(mapping: dict[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise ProblemFileError(f"{where}: missing required field {key!r}")
    return mapping[key]


def _matrix(value: Any, where: str) -> tuple[tuple[int, ...], ...]:
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise ProblemFileError(f"{where}: expected a list of rows")
    try:
        return tuple(tuple(int(x) for x in row) for row in value)
    except (TypeError, ValueError) as e:
        raise ProblemFileError(f"{where}: matrix entries must be integers") from e


def _build_lattice(
    name: str, specs: dict[str, Any], built: dict[str, Lattice], stack: tuple[str, ...]
) -> Lattice:
    if name in built:
        return built[name]
    if name not in specs:
        raise ProblemFileError(f"Reference to undefined lattice {name!r}")
    if name in stack:
        raise ProblemFileError(f"Lattice definitions are cyclic: {' -> '.join(stack + (name,))}")
    spec = specs[name]
    where = f"lattice {name!r}"
    if not isinstance(spec, dict):
        raise ProblemFileError(f"{where}: expected an object")
    forms = [k for k in _LATTICE_FORMS if k in spec]
    if len(forms) != 1:
        raise ProblemFileError(f"{where}: give exactly one of {', '.join(_LATTICE_FORMS)}")
    form = forms[0]
    label = spec.get("label", name)

    def ref(other: str) -> Lattice:
        return _build_lattice(other, specs, built, stack + (name,))

    if form == "gram":
        lattice = Lattice(_matrix(spec["gram"], where), label=label)
        if "rank" in spec and int(spec["rank"]) != lattice.rank:
            raise ProblemFileError(f"{where}: rank {spec['rank']} != Gram size {lattice.rank}")
    elif form == "standard":
        kind = str(spec["standard"]).upper()
        factory = {"E8": e8, "A1": a1}
        if kind == "U":
            lattice = hyperbolic_plane()
        elif kind in factory:
            lattice = factory[kind]()
        else:
            raise ProblemFileError(f"{where}: unknown standard lattice {spec['standard']!r}")
        scale = int(spec.get("scale", 1))
        if scale != 1:
            lattice = rescale(lattice, scale)
    elif form == "diagonal":
        lattice = diagonal(*(int(x) for x in spec["diagonal"]))
    elif form == "direct_sum":
        lattice = direct_sum(*(ref(part) for part in spec["direct_sum"]))
    elif form == "mukai":
        lattice = mukai_lattice(ref(spec["mukai"]))
    else:
        lattice = rescale(ref(spec["rescale"]), int(_require(spec, "by", where)))

    names = tuple(spec.get("names", lattice.names))
    classes = {}
    for cname, coords in spec.get("classes", {}).items():
        classes[cname] = tuple(int(x) for x in coords)
    lattice = Lattice(
        lattice.gram,
        label=label,
        names=names,
        classes=tuple(sorted(classes.items())),
        ns=lattice.ns,
    )
    built[name] = lattice
    return lattice


def _build_action(name: str, spec: Any, lattices: dict[str, Lattice]) -> GroupAction:
    where = f"action {name!r}"
    if not isinstance(spec, dict):
        raise ProblemFileError(f"{where}: expected an object")
    lattice_name = _require(spec, "lattice", where)
    if lattice_name not in lattices:
        raise ProblemFileError(f"{where}: unknown lattice {lattice_name!r}")
    lattice = lattices[lattice_name]
    generators = [
        Isometry(lattice, _matrix(m, f"{where} generator {k}"), label=f"{name}[{k}]")
        for k, m in enumerate(_require(spec, "generators", where))
    ]
    return generate_group(generators, label=name)


def _check_metadata(data: EquivalenceData, metadata: dict[str, Any]) -> None:
    """Consistency checks between the dual generators and documented invariants."""
    if "fixed_points" in metadata:
        r = int(metadata["fixed_points"])
        if not data.dual_generators:
            raise ProblemFileError("fixed_points given without a dual generator")
        q = data.dual_generators[0].matrix
        if 4 * q[-1][0] != -r:
            raise ProblemFileError(
                f"Dual generator sends (1,0,0) to point-class coefficient {q[-1][0]}, "
                f"expected -{r}/4"
            )
    if metadata.get("dual_involution"):
        for gen in data.dual_generators:
            if not gen.compose(gen).is_identity():
                raise ProblemFileError("A dual generator is not an involution")


def _build_equivalence(
    spec: dict[str, Any], lattices: dict[str, Lattice], actions: dict[str, GroupAction]
) -> EquivalenceData:
    where = "equivalence"
    lam = lattices.get(_require(spec, "lambda", where))
    lam_p = lattices.get(_require(spec, "lambda_prime", where))
    if lam is None or lam_p is None:
        raise ProblemFileError(f"{where}: lambda and lambda_prime must name lattices")
    group = actions.get(_require(spec, "group", where))
    if group is None:
        raise ProblemFileError(f"{where}: unknown group {spec['group']!r}")
    dual_name = spec.get("dual")
    if dual_name is not None and dual_name not in actions:
        raise ProblemFileError(f"{where}: unknown dual action {dual_name!r}")
    dual_generators = actions[dual_name].generators if dual_name else ()

    decompositions = []
    for target, decomps in sorted(spec.get("decompositions", {}).items()):
        v = parse_vector(target, lam)
        parsed = tuple(tuple(parse_vector(u, lam) for u in parts) for parts in decomps)
        decompositions.append((v, parsed))

    q_hint = _matrix(spec["q_map"], f"{where} q_map") if "q_map" in spec else None
    data = EquivalenceData(
        lattice=lam,
        lattice_prime=lam_p,
        p_map=_matrix(_require(spec, "p_map", where), f"{where} p_map"),
        group=group,
        dual_generators=dual_generators,
        brauer_trivial=bool(spec.get("brauer_trivial", True)),
        cyclic=bool(spec.get("cyclic", True)),
        divisibility_mode=spec.get("divisibility", "mukai"),
        q_hint=q_hint,
        decompositions=tuple(decompositions),
        label=spec.get("label", "equivalence"),
    )
    _check_metadata(data, spec.get("metadata", {}))
    return data


def parse_problem(raw: dict[str, Any], source: Path | None = None) -> ProblemFile:
    """Validate a decoded problem file and build its objects.

    Args:
        raw: The decoded JSON object.
        source: Where it was read from, for messages.

    Returns:
        The parsed problem.

    Raises:
        ProblemFileError: If the file is malformed or a reference dangles.
    """
    if not isinstance(raw, dict):
        raise ProblemFileError("A problem file must be a JSON object")
    version = str(raw.get("version", ""))
    if version != FORMAT_VERSION:
        raise ProblemFileError(f"Unsupported format version {version!r}, expected {FORMAT_VERSION}")
    name = str(raw.get("name") or (source.stem if source else "problem"))
    try:
        lattice_specs = raw.get("lattices", {})
        lattices: dict[str, Lattice] = {}
        for lname in lattice_specs:
            _build_lattice(lname, lattice_specs, lattices, ())
        actions = {
            aname: _build_action(aname, spec, lattices)
            for aname, spec in raw.get("actions", {}).items()
        }
        equivalence = (
            _build_equivalence(raw["equivalence"], lattices, actions)
            if "equivalence" in raw
            else None
        )
    except ProblemFileError:
        raise
    except MukaiFixedError as e:
        raise ProblemFileError(f"{name}: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise ProblemFileError(f"{name}: malformed entry ({e})") from e

    tasks = []
    for k, task in enumerate(raw.get("tasks", [])):
        if not isinstance(task, dict):
            raise ProblemFileError(f"task {k}: expected an object")
        kind = _require(task, "kind", f"task {k}")
        if kind not in TASK_KINDS:
            raise ProblemFileError(f"task {k}: unknown kind {kind!r}")
        params = {key: val for key, val in task.items() if key not in ("kind", "name", "expect")}
        name_k = str(task.get("name", f"{kind}-{k}"))
        tasks.append(TaskSpec(kind, name_k, params, task.get("expect")))

    logger.debug(
        "Parsed %s: %d lattices, %d actions, %d tasks",
        name,
        len(lattices),
        len(actions),
        len(tasks),
    )
    return ProblemFile(
        version=version,
        name=name,
        lattices=lattices,
        actions=actions,
        equivalence=equivalence,
        tasks=tasks,
        description=str(raw.get("description", "")),
        source=source,
        raw=raw,
    )


def load_problem(path: Path) -> ProblemFile:
    """Read and parse a problem file.

    Raises:
        ProblemFileError: If the file cannot be read or is invalid.
    """
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ProblemFileError(f"Cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"{path} is not valid JSON: {e}") from e
    return parse_problem(raw, source=path)


def load_fixture(name: str) -> ProblemFile:
    """Load one of the shipped fixtures by name.

    Raises:
        ProblemFileError: If no such fixture is shipped.
    """
    stem = name.removesuffix(".json")
    if stem not in SHIPPED_FIXTURES:
        raise ProblemFileError(
            f"Unknown fixture {name!r}; shipped fixtures: {', '.join(SHIPPED_FIXTURES)}"
        )
    text = resources.files("mukai_fixed").joinpath("fixtures", f"{stem}.json").read_text("utf-8")
    return parse_problem(json.loads(text), source=Path(f"fixtures/{stem}.json"))


def resolve_problem(ref: str) -> ProblemFile:
    """Load a problem from a path, falling back to a shipped fixture of the same name."""
    path = Path(ref)
    if path.is_file():
        return load_problem(path)
    return load_fixture(path.name)


def dump_problem(problem: ProblemFile) -> str:
    """Serialize a problem in canonical form (sorted keys, fixed layout)."""
    return canonical_json(problem.raw)
