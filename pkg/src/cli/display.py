"""Display formatting functions for the RFRBoost CLI.

All Rich console output and fallback text formatting is centralized here.
Report dictionaries come from src.cli.commands; nothing here computes.
"""

from __future__ import annotations

from typing import Any

import pandas as pd

try:
    from rich import box
    from rich.console import Console
    from rich.panel import Panel
    from rich.table import Table
    HAS_RICH = True
except ImportError:
    HAS_RICH = False

# Global console instance
console = Console() if HAS_RICH else None


# =============================================================================
# Basic Output Helpers
# =============================================================================

def print_header(title: str) -> None:
    """Print a formatted header."""
    if HAS_RICH and console:
        console.print(Panel(title, box=box.DOUBLE, style="bold cyan"))
    else:
        print(f"\n{'=' * 60}\n  {title}\n{'=' * 60}\n")


def print_msg(msg: str, style: str = "info") -> None:
    """Print a styled message with icon."""
    symbols = {"success": ("✓", "green"), "error": ("✗", "red"), "info": ("ℹ", "blue")}
    sym, color = symbols.get(style, ("ℹ", "blue"))
    if HAS_RICH and console:
        console.print(f"[{color}]{sym}[/{color}] {msg}")
    else:
        print(f"{sym} {msg}")


def _fmt(value: Any, digits: int = 6) -> str:
    if isinstance(value, float):
        return f"{value:.{digits}g}"
    return str(value)


# =============================================================================
# Training
# =============================================================================

def display_train_report(report: dict) -> None:
    """Model summary plus the training risk after every block."""
    trace = report["risk_trace"]
    if not HAS_RICH or not console:
        print(f"{report['algorithm']} ({report['loss']}) on {report['n']} rows, "
              f"{report['n_blocks']} blocks, width {report['width']}")
        for t, value in enumerate(trace):
            print(f"  t={t}: risk {_fmt(value)}")
        print(f"Training {report['metric']}: {_fmt(report['train_score'])}")
        return

    lines = [
        f"[bold]Algorithm:[/bold]  {report['algorithm']} ({report['loss']})",
        f"[bold]Rows:[/bold]       {report['n']}   [bold]Inputs:[/bold] {report['input_dim']}",
        f"[bold]Blocks:[/bold]     {report['n_blocks']}   [bold]Width:[/bold] {report['width']}",
        f"[bold]Training {report['metric']}:[/bold] [cyan]{_fmt(report['train_score'])}[/cyan]",
    ]
    console.print(Panel("\n".join(lines), title="[bold]Model[/bold]", border_style="cyan", box=box.ROUNDED))

    table = Table(title="Training Risk", box=box.ROUNDED)
    table.add_column("Blocks", justify="right", style="cyan")
    table.add_column("Risk", justify="right")
    for t, value in enumerate(trace):
        table.add_row(str(t), _fmt(value))
    console.print(table)


def display_evaluation(report: dict) -> None:
    if not HAS_RICH or not console:
        print(f"{report['metric']}: {_fmt(report['score'])} on {report['n']} rows")
        return
    console.print(Panel(
        f"[bold]{report['metric'].upper()}:[/bold] [cyan]{_fmt(report['score'])}[/cyan]  "
        f"[dim]({report['n']} rows, {report['data_path']})[/dim]",
        title="[bold]Evaluation[/bold]", border_style="cyan", box=box.ROUNDED,
    ))


# =============================================================================
# Cross-validation and grid search
# =============================================================================

def display_cv(report: dict) -> None:
    """Per-fold scores with mean and sample standard deviation."""
    metric = report["metric"]
    scores = report["scores"]
    if not HAS_RICH or not console:
        print(f"\n{report['k']}-fold CV ({metric})")
        for fold, value in enumerate(scores):
            print(f"  fold {fold}: {_fmt(value)}")
        print(f"  mean {_fmt(report['mean'])}  sd {_fmt(report['sd'])}")
        return

    table = Table(title=f"{report['k']}-fold Cross-Validation", box=box.ROUNDED)
    table.add_column("Fold", justify="right", style="cyan")
    table.add_column(metric.upper(), justify="right")
    for fold, value in enumerate(scores):
        table.add_row(str(fold), _fmt(value))
    table.add_section()
    table.add_row("[bold]mean[/bold]", f"[bold]{_fmt(report['mean'])}[/bold]")
    table.add_row("sd", _fmt(report["sd"]))
    console.print(table)


def display_grid(table_df: pd.DataFrame, metric: str) -> None:
    """One row per grid point; the selected point is highlighted."""
    axes = [c for c in table_df.columns
            if c not in ("mean", "sd", "selected") and not str(c).startswith("fold_")]
    if not HAS_RICH or not console:
        print(table_df[[*axes, "mean", "sd", "selected"]].to_string(index=False))
        return

    table = Table(title=f"Grid Search ({metric})", box=box.ROUNDED)
    for name in axes:
        table.add_column(str(name), style="cyan")
    table.add_column("Mean", justify="right")
    table.add_column("SD", justify="right")
    for _, row in table_df.iterrows():
        cells = [_fmt(row[name]) for name in axes] + [_fmt(float(row["mean"])), _fmt(float(row["sd"]))]
        table.add_row(*cells, style="bold green" if bool(row["selected"]) else None)
    console.print(table)


def display_nested(report: dict) -> None:
    metric = report["metric"]
    if not HAS_RICH or not console:
        for fold, (value, point) in enumerate(zip(report["scores"], report["selected"], strict=True)):
            print(f"  outer fold {fold}: {_fmt(value)}  {point}")
        print(f"  mean {_fmt(report['mean'])}  sd {_fmt(report['sd'])}")
        return

    table = Table(title=f"Nested Cross-Validation ({metric})", box=box.ROUNDED)
    table.add_column("Outer fold", justify="right", style="cyan")
    table.add_column(metric.upper(), justify="right")
    table.add_column("Selected")
    for fold, (value, point) in enumerate(zip(report["scores"], report["selected"], strict=True)):
        table.add_row(str(fold), _fmt(value), ", ".join(f"{k}={_fmt(v)}" for k, v in point.items()))
    table.add_section()
    table.add_row("[bold]mean[/bold]", f"[bold]{_fmt(report['mean'])}[/bold]", "")
    table.add_row("sd", _fmt(report["sd"]), "")
    console.print(table)


# =============================================================================
# Point cloud experiment
# =============================================================================

def display_pointcloud(report: dict) -> None:
    """Test accuracy per model and repeat."""
    models = report["models"]
    if not HAS_RICH or not console:
        print("\nConcentric circles test accuracy")
        for name, result in models.items():
            runs = ", ".join(_fmt(a, 4) for a in result["accuracy"])
            print(f"  {name:<10} mean {_fmt(result['mean'], 4)}  sd {_fmt(result['sd'], 4)}  [{runs}]")
        return

    table = Table(title="Concentric Circles: Test Accuracy", box=box.ROUNDED)
    table.add_column("Model", style="cyan")
    table.add_column("Mean", justify="right")
    table.add_column("SD", justify="right")
    table.add_column("Per repeat")
    table.add_column("Selected l2")
    for name, result in models.items():
        table.add_row(
            name,
            _fmt(result["mean"], 4),
            _fmt(result["sd"], 4),
            ", ".join(_fmt(a, 4) for a in result["accuracy"]),
            ", ".join(_fmt(v, 3) for v in result["selected_l2"]),
        )
    console.print(table)
    if report.get("representations_dir"):
        print_msg(f"Representations written to {report['representations_dir']}", "success")
