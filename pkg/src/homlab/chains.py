"""Sparse formal Z-linear combinations of generators.

A generator is identified by its label tuple (the vertex sequence of a
singular cube, or the vertex tuple of a path); a Chain maps generators to
exact integer coefficients and never stores zeros.
"""

from __future__ import annotations


class Chain:
    __slots__ = ("dim", "terms")

    def __init__(self, dim, terms=None):
        self.dim = dim
        self.terms = {}
        if terms:
            for key, coeff in (terms.items() if isinstance(terms, dict) else terms):
                self.add_term(key, coeff)

    def add_term(self, key, coeff):
        if not coeff:
            return
        new = self.terms.get(key, 0) + coeff
        if new:
            self.terms[key] = new
        else:
            del self.terms[key]

    def is_zero(self):
        return not self.terms

    def items(self):
        return sorted(self.terms.items())

    def __add__(self, other):
        if self.dim != other.dim:
            raise ValueError("cannot add chains of different dimensions")
        out = Chain(self.dim, dict(self.terms))
        for key, coeff in other.terms.items():
            out.add_term(key, coeff)
        return out

    def __neg__(self):
        return Chain(self.dim, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scaled(self, c):
        if not c:
            return Chain(self.dim)
        return Chain(self.dim, {k: c * v for k, v in self.terms.items()})

    def __eq__(self, other):
        return (isinstance(other, Chain) and self.dim == other.dim
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.dim, frozenset(self.terms.items())))

    def __repr__(self):
        if not self.terms:
            return f"<Chain dim={self.dim} 0>"
        body = " ".join(f"{'+' if v > 0 else '-'}{abs(v) if abs(v) != 1 else ''}{k}"
                        for k, v in self.items())
        return f"<Chain dim={self.dim} {body}>"
