"""Wavepacket simulation of Raman-pulse atom-interferometer gyroscopes."""

__version__ = "0.1.0"
