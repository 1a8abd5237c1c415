"""
Environment Variable Loader

Loads per-checkout settings from config/rfrboost.env at module import, before
the logging module reads RFRBOOST_LOG_LEVEL / RFRBOOST_LOG_FILE /
RFRBOOST_LOG_FORMAT.

Usage:
    # Import first in the application entry point
    import src.env_loader  # noqa: F401
"""

from __future__ import annotations

from pathlib import Path

try:
    from dotenv import load_dotenv
    HAS_DOTENV = True
except ImportError:
    HAS_DOTENV = False


def load_environment_variables(env_file: str | None = None, override: bool = False) -> bool:
    """
    Load environment variables from an .env file.

    Args:
        env_file: Path to .env file (default: config/rfrboost.env)
        override: Replace variables already set in the process environment

    Returns:
        True if variables were loaded, False otherwise
    """
    if not HAS_DOTENV:
        return False

    if env_file is None:
        project_root = Path(__file__).resolve().parent.parent
        env_file = str(project_root / "config" / "rfrboost.env")

    env_path = Path(env_file)
    if not env_path.exists():
        return False

    return bool(load_dotenv(dotenv_path=str(env_path), override=override))


load_environment_variables()
