"""Tests for elastoborn."""
