"""Chart generation for benchmark CSV produced by the reclamation harness."""

from .plotting import ChartSpec, InputError, build_panels, load_rows, render

__all__ = ["ChartSpec", "InputError", "build_panels", "load_rows", "render"]
