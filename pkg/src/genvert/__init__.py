"""genvert: invert small feed-forward ReLU/LeakyReLU generators.

Exact layer-wise recovery for realizable observations, error-bound linear
programs for noisy ones, descent baselines, satisfiability hardness gadgets
and a seeded experiment harness; served over HTTP with a thin CLI client.
"""

__version__ = "0.1.0"
