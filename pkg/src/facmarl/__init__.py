"""facmarl: a desk-scale laboratory for factored multi-agent actor-critic
learning (FACMAC-family learners, value-mixing critics, and the environments
that separate centralised from per-agent policy gradients)."""

__version__ = "0.1.0"
