"""Tests for the qswitch simulator."""
