"""Desk-scale annealing pipeline: co-k-plex formulation, Chimera embedding,
parameter setting, classical sampling, decoding, and TTS statistics."""

__version__ = "0.1.0"
