"""
RIMSA Lab
Metasurface-antenna channel simulation and learned beamforming control.
"""

__version__ = "0.1.0"
