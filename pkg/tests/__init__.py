"""Test suite for the function-calling dialogue state tracker."""
