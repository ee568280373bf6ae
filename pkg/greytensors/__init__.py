__version__ = "v0.1.0"
__description__ = "Estimate Minkowski tensors from grey-value images of blurred sets."
