"""Transpile a C/C++ subset to safe Rust, with coverage and differential checks."""

__version__ = "0.1.0"
