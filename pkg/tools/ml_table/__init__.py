"""Tabelle der Mittag-Leffler-Funktion als CSV."""
