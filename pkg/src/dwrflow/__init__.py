"""dwrflow: steady 2D Euler finite volumes with Newton-GMG and multi-mesh
goal-oriented (dual-weighted-residual) mesh adaptation."""

__version__ = "0.1.0"
