"""Runtime roles: Net-LAN monitors, the honeypot monitor, and Central."""

from .central import (
    Central,
    OFFICER_ALWAYS_ATTACK,
    OFFICER_ALWAYS_FALSE_ALARM,
    OFFICER_MANUAL,
    OFFICER_ORACLE,
    OFFICER_POLICIES,
)
from .monitors import HoneypotMonitor, NetLanMonitor

__all__ = [
    "Central",
    "HoneypotMonitor",
    "NetLanMonitor",
    "OFFICER_ALWAYS_ATTACK",
    "OFFICER_ALWAYS_FALSE_ALARM",
    "OFFICER_MANUAL",
    "OFFICER_ORACLE",
    "OFFICER_POLICIES",
]
