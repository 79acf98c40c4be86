"""Exact counting of Smirnov color-words and Hamiltonian cycles in complete multipartite graphs."""

__version__ = "1.0.0"
