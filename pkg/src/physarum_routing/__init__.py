"""Agent-based slime-mould chemotaxis on agar arenas, used as a logic element."""
__version__ = "0.1.0"
