"""Whole-body kinematic feasibility toolkit for legged manipulators."""
