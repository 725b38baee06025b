"""Tests for the capwater package."""
