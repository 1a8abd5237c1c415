"""CLI module for RFRBoost.

Provides display formatting and the subcommand handlers.
"""

from src.cli.commands import (
    COMMANDS,
    exit_code_for,
    handle_cv_command,
    handle_evaluate_command,
    handle_gridcv_command,
    handle_pointcloud_command,
    handle_train_command,
    run_command,
)
from src.cli.display import (
    display_cv,
    display_evaluation,
    display_grid,
    display_nested,
    display_pointcloud,
    display_train_report,
    print_header,
    print_msg,
)

__all__ = [
    # Display
    "print_header",
    "print_msg",
    "display_train_report",
    "display_evaluation",
    "display_cv",
    "display_grid",
    "display_nested",
    "display_pointcloud",
    # Commands
    "COMMANDS",
    "exit_code_for",
    "handle_train_command",
    "handle_evaluate_command",
    "handle_cv_command",
    "handle_gridcv_command",
    "handle_pointcloud_command",
    "run_command",
]
