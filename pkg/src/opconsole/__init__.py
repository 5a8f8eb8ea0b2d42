"""Flexible operator console for teleoperated ground robots.

A headless gateway core (pub/sub/service wire protocol, declarative
action system, mission state machine, e-stop manager, telemetry
classification and camera stream metrics), a deterministic desk-scale
robot simulator, a browser dashboard served over WebSocket, and the
snapshot measurement tool for rectified length measurements.
"""

__version__ = "0.1.0"
