"""Convolutional feature export to FMAP files.

Produces per-frame activation tensors (shallow/deep RGB layers, deep
motion-network layer over optical-flow images) in the binary FMAP format
consumed by the tracker package.
"""

__version__ = "0.1.0"
