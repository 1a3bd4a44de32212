"""Learning dynamics of linear state space models in the frequency domain."""

__version__ = "0.1.0"
