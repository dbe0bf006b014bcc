"""Test suite for pedcross"""
# Empty file to mark tests directory as a Python package
