"""Quantized tensor train PDE solvers."""
