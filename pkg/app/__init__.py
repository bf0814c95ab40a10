"""Multiband linear cellular automata over F_p^r: exact counting, zeta functions and oracles."""
