"""Colored and colorblind domain-wall vertex models: exact partition functions,
a Metropolis sampler and arctic curve computations."""

__version__ = "0.1.0"
