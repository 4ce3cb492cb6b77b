"""Hybrid test generation for MiniC programs.

Goal labels are injected into the program, ranked by depth in the goals tree,
and then chased by a range-aware mutation fuzzer and a bounded symbolic
executor, with a tracer replaying every produced input to track coverage.
"""

__version__ = "0.1.0"
