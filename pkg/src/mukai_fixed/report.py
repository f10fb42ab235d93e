"""Console tables and canonical JSON for run reports."""

from typing import Any

from rich.console import Console
from rich.markup import escape
from rich.table import Table

from mukai_fixed.runner import RunReport, TaskResult
from mukai_fixed.utils import canonical_json, format_elapsed


def report_to_json(report: RunReport) -> str:
    """Byte-stable JSON of a run report."""
    return canonical_json(report.to_dict())


def _show(value: Any) -> str:
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, list) and len(value) == 2 and all(isinstance(x, int) for x in value):
        num, den = value
        return str(num) if den == 1 else f"{num}/{den}"
    if isinstance(value, list):
        return "[" + ", ".join(_show(x) for x in value) + "]"
    if isinstance(value, dict):
        return ", ".join(f"{k}: {_show(v)}" for k, v in value.items())
    return str(value)


def _census(census: dict[str, int]) -> str:
    if not census:
        return "-"
    return ", ".join(f"{sig}: {n}" for sig, n in census.items())


def profile_table(data: dict[str, Any]) -> Table:
    """The class table of a fixed-locus result."""
    table = Table(
        title=f"Fixed locus over {data['vector']}", show_header=True, header_style="bold"
    )
    table.add_column("Class")
    table.add_column("Square", justify="right")
    table.add_column("Dim", justify="right")
    table.add_column("Census")
    table.add_column("Sym²")
    table.add_column("Count", justify="right")
    table.add_column("Div 1", justify="right")
    table.add_column("Stability")
    for row in data["profile"]:
        table.add_row(
            row["label"],
            str(row["square"]),
            str(row["dimension"]),
            _census(row["census"]),
            "yes" if row["sym_power"] else "",
            str(row["count"]),
            str(row["divisibility_one"]),
            row["stability"],
        )
    return table


def _verify_table(data: dict[str, Any]) -> Table:
    table = Table(title="Equivalence data checks", show_header=True, header_style="bold")
    table.add_column("Status")
    table.add_column("Check")
    for name, passed in data["checks"].items():
        table.add_row("[green]✓[/green]" if passed else "[red]✗[/red]", name)
    return table


def _fields_table(result: TaskResult) -> Table:
    table = Table(title=f"{result.kind}: {result.name}", show_header=False)
    table.add_column("Field", style="bold")
    table.add_column("Value")
    for key, value in result.data.items():
        if key in ("representatives", "vectors", "entries") and isinstance(value, list):
            value = f"{len(value)} listed (see --json)"
        table.add_row(key, escape(_show(value)))
    return table


def print_task(console: Console, result: TaskResult) -> None:
    """Print one task result."""
    status = "[green]passed[/green]" if result.passed else "[red]FAILED[/red]"
    console.print(
        f"[bold cyan]{result.kind}[/bold cyan] {result.name}: {status} "
        f"({format_elapsed(result.elapsed)})"
    )
    if result.data:
        if result.kind == "fixed-locus":
            console.print(profile_table(result.data))
            for note in result.data.get("notes", []):
                console.print(f"  [dim]- {escape(note)}[/dim]")
        elif result.kind == "verify":
            console.print(_verify_table(result.data))
        elif result.kind == "euler":
            console.print(f"  {result.data['series']}")
            if "euler_characteristic" in result.data:
                console.print(
                    f"  Euler characteristic: {result.data['euler_characteristic']} "
                    "[dim](conditional on a smooth moduli space)[/dim]"
                )
        else:
            console.print(_fields_table(result))
    for message in result.messages:
        colour = "red" if not result.passed else "yellow"
        console.print(f"  [{colour}]{escape(message)}[/{colour}]")


def print_report(console: Console, report: RunReport) -> None:
    """Print every task and a closing summary line."""
    console.print(f"[bold cyan]Problem:[/bold cyan] {report.problem}")
    for result in report.results:
        console.print()
        print_task(console, result)
    failed = sum(1 for r in report.results if not r.passed)
    console.print()
    if failed:
        console.print(f"[bold red]Failed:[/bold red] {failed} of {len(report.results)} tasks")
    else:
        console.print(f"[bold green]All {len(report.results)} tasks passed[/bold green]")
