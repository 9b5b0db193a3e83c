"""Test suite for redpen (package so modules can share helpers)."""
