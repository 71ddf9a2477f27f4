"""Analytical and Monte Carlo performance evaluation of an infrared LiFi uplink."""

__version__ = "0.1.0"
