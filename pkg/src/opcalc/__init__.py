"""Exact-arithmetic calculus for the rational-function operad, free
commutative Rota-Baxter algebras, descent-algebra idempotents, and truncated
free noncommutative algebra, with a registry of machine-checked identities."""

from .checks import Bounds, CHECK_IDS, Report, run_all, run_check

__version__ = "0.1.0"

__all__ = ["Bounds", "CHECK_IDS", "Report", "run_all", "run_check", "__version__"]
