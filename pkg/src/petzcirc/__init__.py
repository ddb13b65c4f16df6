"""Construction, circuit synthesis and simulation of code-specific Petz recovery maps."""

__version__ = "0.1.0"
