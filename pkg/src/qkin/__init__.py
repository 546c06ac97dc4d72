"""Quaternion kinematics and an error-state Kalman filter for IMU navigation."""

from . import discretize, eskf, quat, rate_int, sim, slerp, so3
from .quat import DomainError

__all__ = ["discretize", "eskf", "quat", "rate_int", "sim", "slerp", "so3", "DomainError"]
__version__ = "0.1.0"
