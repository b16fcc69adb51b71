"""Kottler (Schwarzschild-de Sitter) and Nariai static triples: horizon data, area bounds and identity checks."""
