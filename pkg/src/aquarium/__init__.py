"""Chess billiards, internal-wave spectral tools and boundary integral solvers."""

__version__ = "0.1.0"
