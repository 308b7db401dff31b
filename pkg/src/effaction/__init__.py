"""Effective-action state augmentation for RL with prolonged action effects."""

__version__ = "0.1.0"
