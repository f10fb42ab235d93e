"""Command-line interface for mukai-fixed."""

import json
import logging
import sys
import traceback
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from mukai_fixed import __version__
from mukai_fixed.config import (
    DEFAULT_ORACLE_CHARGES,
    DEFAULT_ORACLE_PROBLEMS,
    DEFAULT_ORACLE_SEED,
    DEFAULT_TERMS,
    SHIPPED_FIXTURES,
    SUPPORT_MIN_SQUARE,
)
from mukai_fixed.exceptions import MukaiFixedError, ValidationError, VerificationError
from mukai_fixed.problem import ProblemFile, TaskSpec, load_fixture, resolve_problem
from mukai_fixed.report import print_report, report_to_json
from mukai_fixed.runner import RunReport, execute_task, run_problem

console = Console()

_output_option = click.option(
    "--json/--table",
    "as_json",
    default=False,
    help="Print canonical JSON instead of tables.",
)


def _setup_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@contextmanager
def _handle_errors(ctx: click.Context) -> Iterator[None]:
    verbose = bool(ctx.find_root().params.get("verbose"))
    try:
        yield
    except VerificationError as e:
        click.secho(f"Verification failed: {e}", fg="red", err=True)
        sys.exit(1)
    except MukaiFixedError as e:
        click.secho(f"Error: {e}", fg="red", err=True)
        sys.exit(2)
    except Exception as e:
        click.secho(f"Unexpected error: {e}", fg="red", err=True)
        if verbose:
            traceback.print_exc()
        sys.exit(2)


def _emit(report: RunReport, as_json: bool) -> None:
    if as_json:
        click.echo(report_to_json(report), nl=False)
    else:
        print_report(console, report)
    sys.exit(report.exit_status)


def _single(
    problem: ProblemFile | None, kind: str, params: dict[str, Any], as_json: bool, oracle: bool
) -> None:
    task = TaskSpec(kind=kind, name=kind, params=params)
    result = execute_task(problem, task, oracle=oracle)
    report = RunReport(problem=problem.name if problem else kind, results=[result])
    _emit(report, as_json)


@click.group()
@click.version_option(__version__, prog_name="mukai-fixed")
@click.option("-v", "--verbose", is_flag=True, help="Enable debug logging.")
def main(verbose: bool) -> None:
    """Exact lattice computations for fixed loci of symplectic group actions.

    Every command taking PROBLEM accepts a path to a problem file or the
    name of a shipped fixture (see `mukai-fixed fixtures`).

    Examples:
        mukai-fixed euler --frameshape "1^2 11^2" --terms 8
        mukai-fixed fixed-locus genus2 --vector "(0,2H,0)"
        mukai-fixed verify fixtures/genus2.json
    """
    _setup_logging(verbose)


@main.command()
@click.argument("problem_ref", metavar="PROBLEM")
@click.option("--task", "tasks", multiple=True, help="Run only the tasks with this name.")
@click.option("--oracle", is_flag=True, help="Force brute-force cross-checks.")
@_output_option
@click.pass_context
def run(
    ctx: click.Context, problem_ref: str, tasks: tuple[str, ...], oracle: bool, as_json: bool
) -> None:
    """Run every task of a problem file in order."""
    with _handle_errors(ctx):
        problem = resolve_problem(problem_ref)
        report = run_problem(problem, oracle=oracle, only=list(tasks) or None)
        _emit(report, as_json)


@main.command()
@click.argument("problem_ref", metavar="PROBLEM", required=False)
@click.option("--action", help="Named action whose generators are classified.")
@click.option("--symbol", "symbols", multiple=True, help="Frameshape symbol such as '1^8 2^8'.")
@click.option("--all-elements", is_flag=True, help="Classify every group element.")
@_output_option
@click.pass_context
def frameshape(
    ctx: click.Context,
    problem_ref: str | None,
    action: str | None,
    symbols: tuple[str, ...],
    all_elements: bool,
    as_json: bool,
) -> None:
    """Frameshapes of group elements or of explicit symbols."""
    with _handle_errors(ctx):
        problem = resolve_problem(problem_ref) if problem_ref else None
        params: dict[str, Any] = {"symbols": list(symbols), "all_elements": all_elements}
        if action:
            params["action"] = action
        _single(problem, "frameshape", params, as_json, oracle=False)


@main.command()
@click.option("--frameshape", "frameshape_text", required=True, help="Frameshape symbol.")
@click.option("--terms", default=DEFAULT_TERMS, show_default=True, help="Coefficients shown.")
@click.option("--v-square", type=int, help="Also report the Euler characteristic for v^2.")
@_output_option
@click.pass_context
def euler(
    ctx: click.Context, frameshape_text: str, terms: int, v_square: int | None, as_json: bool
) -> None:
    """Expansion of 1/eta_g, whose coefficients are fixed-locus Euler characteristics."""
    with _handle_errors(ctx):
        params: dict[str, Any] = {"frameshape": frameshape_text, "terms": terms}
        if v_square is not None:
            params["v_square"] = v_square
        _single(None, "euler", params, as_json, oracle=False)


def _json_option(text: str | None, what: str) -> Any:
    if text is None:
        return []
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ValidationError(f"--{what} is not valid JSON: {e}") from e


@main.command()
@click.argument("problem_ref", metavar="PROBLEM")
@click.option("--vector", help="Fiber of p over this Mukai vector.")
@click.option("--lattice", help="Named lattice to search instead of the fiber of p.")
@click.option("--map", "map_json", help="JSON matrix of linear conditions (with --lattice).")
@click.option("--target", "target_json", help="JSON list of condition values (with --lattice).")
@click.option("--min-square", default=SUPPORT_MIN_SQUARE, show_default=True, type=int)
@click.option("--max-square", type=int)
@click.option("--orbits", help="Group the vectors into orbits of a named action, or 'dual'.")
@click.option("--list", "list_vectors", is_flag=True, help="Include the vectors in the output.")
@click.option("--oracle", is_flag=True, help="Cross-check against a certified box scan.")
@_output_option
@click.pass_context
def fiber(
    ctx: click.Context,
    problem_ref: str,
    vector: str | None,
    lattice: str | None,
    map_json: str | None,
    target_json: str | None,
    min_square: int,
    max_square: int | None,
    orbits: str | None,
    list_vectors: bool,
    oracle: bool,
    as_json: bool,
) -> None:
    """Vectors of bounded square in an affine fiber."""
    with _handle_errors(ctx):
        if (vector is None) == (lattice is None):
            raise ValidationError("Give exactly one of --vector and --lattice")
        problem = resolve_problem(problem_ref)
        params: dict[str, Any] = {
            "min_square": min_square,
            "max_square": max_square,
            "list": list_vectors,
        }
        if vector is not None:
            params["vector"] = vector
        else:
            params["lattice"] = lattice
            params["map"] = _json_option(map_json, "map")
            params["target"] = _json_option(target_json, "target")
        if orbits:
            params["orbits"] = orbits
        _single(problem, "fiber", params, as_json, oracle)


@main.command("fixed-locus")
@click.argument("problem_ref", metavar="PROBLEM")
@click.option("--vector", required=True, help="Invariant Mukai vector, e.g. '(0,2H,0)'.")
@click.option(
    "--decompose",
    "decompositions",
    multiple=True,
    help="Decomposition of the vector, parts separated by ';'. Repeatable.",
)
@click.option("--no-verify", is_flag=True, help="Skip the equivalence data checks.")
@_output_option
@click.pass_context
def fixed_locus(
    ctx: click.Context,
    problem_ref: str,
    vector: str,
    decompositions: tuple[str, ...],
    no_verify: bool,
    as_json: bool,
) -> None:
    """Classify the components of the fixed locus over a vector."""
    with _handle_errors(ctx):
        problem = resolve_problem(problem_ref)
        params: dict[str, Any] = {"vector": vector, "verify": not no_verify}
        if decompositions:
            params["decompositions"] = [
                [part.strip() for part in d.split(";")] for d in decompositions
            ]
        _single(problem, "fixed-locus", params, as_json, oracle=False)


def _charge_params(omega: str, beta: str, lattice: str | None) -> dict[str, Any]:
    params: dict[str, Any] = {"omega": omega, "beta": beta}
    if lattice:
        params["lattice"] = lattice
    return params


@main.command()
@click.argument("problem_ref", metavar="PROBLEM")
@click.option("--omega", required=True, help="Ample class, e.g. '2H'.")
@click.option("--beta", default="0", show_default=True, help="B-field class.")
@click.option("--vector", required=True, help="Primitive invariant Mukai vector.")
@click.option("--lattice", help="Mukai lattice (default: the equivalence source).")
@click.option("--action", help="Group action (default: the equivalence group).")
@click.option("--min-square", default=SUPPORT_MIN_SQUARE, show_default=True, type=int)
@click.option("--unrestricted", is_flag=True, help="Do not bound the squares of the summands.")
@_output_option
@click.pass_context
def genericity(
    ctx: click.Context,
    problem_ref: str,
    omega: str,
    beta: str,
    vector: str,
    lattice: str | None,
    action: str | None,
    min_square: int,
    unrestricted: bool,
    as_json: bool,
) -> None:
    """Whether a vector admits no splitting with both summands on its ray."""
    with _handle_errors(ctx):
        problem = resolve_problem(problem_ref)
        params = _charge_params(omega, beta, lattice)
        params["vector"] = vector
        params["min_square"] = None if unrestricted else min_square
        if action:
            params["action"] = action
        _single(problem, "genericity", params, as_json, oracle=False)


@main.command()
@click.argument("problem_ref", metavar="PROBLEM")
@click.option("--omega", required=True, help="Ample class, e.g. '2H'.")
@click.option("--beta", default="0", show_default=True, help="B-field class.")
@click.option("--lattice", help="Mukai lattice (default: the equivalence source).")
@click.option("--vector", "vectors", multiple=True, help="Vector to evaluate. Repeatable.")
@_output_option
@click.pass_context
def charge(
    ctx: click.Context,
    problem_ref: str,
    omega: str,
    beta: str,
    lattice: str | None,
    vectors: tuple[str, ...],
    as_json: bool,
) -> None:
    """The central charge exp(beta + i omega) and its values."""
    with _handle_errors(ctx):
        problem = resolve_problem(problem_ref)
        params = _charge_params(omega, beta, lattice)
        params["vectors"] = list(vectors)
        _single(problem, "charge", params, as_json, oracle=False)


@main.command()
@click.argument("problem_ref", metavar="PROBLEM")
@_output_option
@click.pass_context
def verify(ctx: click.Context, problem_ref: str, as_json: bool) -> None:
    """Check the equivalence data of a problem; exit 1 if a check fails."""
    with _handle_errors(ctx):
        problem = resolve_problem(problem_ref)
        _single(problem, "verify", {}, as_json, oracle=False)


@main.command()
@click.option("--seed", default=DEFAULT_ORACLE_SEED, show_default=True)
@click.option("--problems", default=DEFAULT_ORACLE_PROBLEMS, show_default=True)
@click.option("--charges", default=DEFAULT_ORACLE_CHARGES, show_default=True)
@click.option("--planted", type=int, help="Charges with a planted splitting.")
@_output_option
@click.pass_context
def oracle(
    ctx: click.Context,
    seed: int,
    problems: int,
    charges: int,
    planted: int | None,
    as_json: bool,
) -> None:
    """Randomized cross-checks of the exact searches against box scans."""
    with _handle_errors(ctx):
        params: dict[str, Any] = {"seed": seed, "problems": problems, "charges": charges}
        if planted is not None:
            params["planted"] = planted
        _single(None, "oracle", params, as_json, oracle=True)


@main.command()
@click.pass_context
def fixtures(ctx: click.Context) -> None:
    """List the shipped fixtures."""
    with _handle_errors(ctx):
        table = Table(title="Shipped fixtures", show_header=True, header_style="bold")
        table.add_column("Name")
        table.add_column("Tasks", justify="right")
        table.add_column("Description")
        for name in SHIPPED_FIXTURES:
            problem = load_fixture(name)
            table.add_row(name, str(len(problem.tasks)), problem.description)
        console.print(table)


if __name__ == "__main__":
    main()
