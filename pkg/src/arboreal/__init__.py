"""Tree metrics: colorings, low-distortion embeddings and Markov convexity."""

__version__ = "0.1.0"
