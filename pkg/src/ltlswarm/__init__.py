"""Communication-free multi-agent coordination under local LTL tasks."""

__version__ = "0.1.0"
