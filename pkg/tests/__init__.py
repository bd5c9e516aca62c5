"""
Tests for histotest.
"""
