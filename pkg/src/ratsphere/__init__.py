"""Rational points on spheres: enumeration, cap statistics, covering radii and quaternionic Hecke operators."""

from .reports import artifact_version

__version__ = artifact_version()
