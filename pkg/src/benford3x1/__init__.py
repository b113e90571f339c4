"""Leading-digit statistics of 3x+1 iterates: exact iterate algebra, discrepancy
bounds, the two-rotation Bernoulli process and Diophantine scans."""

__version__ = "0.1.0"
