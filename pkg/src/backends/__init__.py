"""Completion backends: live endpoints, record/replay and scripted mocks."""
