"""Identify members of a self-branded online collective from profile
snapshots, map influence over their follower graph, and model the topics of
top influencers' tweets."""

__version__ = "0.1.0"
