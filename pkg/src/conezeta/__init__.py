"""Subring and ideal zeta functions of rings via p-adic cone integrals."""
