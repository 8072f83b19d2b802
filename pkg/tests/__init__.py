"""Test suite for the repeated interaction toolkit."""
