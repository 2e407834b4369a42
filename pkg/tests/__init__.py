"""Test package for the relay secrecy simulator."""
