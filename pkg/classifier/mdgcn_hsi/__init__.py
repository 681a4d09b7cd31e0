"""mdgcn-hsi: multi-scale dynamic graph convolution for hyperspectral cubes."""

__version__ = "0.1.0"
