"""Land-price bubbles under leverage: solvers and regime diagnostics."""
