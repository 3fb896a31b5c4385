"""Command-line interface, device configuration and reproduction targets."""
from .config import DeviceConfig, load_config, load_fixture, parse_config
from .main import main

__all__ = ["DeviceConfig", "load_config", "load_fixture", "main", "parse_config"]
