"""shiftlab: shift spaces, entropy, Birkhoff spectra, and witness orbits.

All logarithms are natural.  The metric convention is d(x,y) = 2^(-first
disagreement), so an epsilon-ball is a cylinder set and every neighborhood
statement becomes finite symbolic data.
"""

__version__ = "0.1.0"
