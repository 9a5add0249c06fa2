"""Numerical laboratory for nearly-integrable Hamiltonian systems on
almost-symplectic phase spaces A x T^n.

Subpackages cover: exact Fourier/polynomial algebra (`poly`, `fourier`),
the almost-symplectic structure (`structure`), Hamiltonian dynamics and
integration (`dynamics`), integer-lattice torus reduction (`lattice`),
one-step resonant normal forms (`normalform`), and the experiment harness
with its CLI (`harness`, `cli`).
"""

from .poly import ActionPolynomial
from .fourier import FourierSeries

__all__ = ["ActionPolynomial", "FourierSeries"]
__version__ = "0.1.0"
