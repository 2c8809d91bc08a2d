"""Black-box indoor-lighting attacks against episodic navigation agents."""

__version__ = "0.1.0"
