"""
Finite-time attitude synchronization of rigid bodies in axis-angle coordinates.
"""
