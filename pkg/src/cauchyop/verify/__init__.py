"""Verification harness: golden cases, series identities, reference integrators."""
