"""Keyed M-ary coherent-state cipher: analysis and simulation."""
