"""Positive and negative definite functions on finite groups with values in
finite-dimensional C*-algebras, twisted by a group action."""
