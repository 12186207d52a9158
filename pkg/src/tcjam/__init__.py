"""Link-level simulation of short codes for space telecommand links under jamming."""

__version__ = "0.1.0"
