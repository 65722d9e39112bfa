"""Mixed-integer representability toolkit: Chvátal functions, elimination schemes, testers."""

__version__ = "0.1.0"
