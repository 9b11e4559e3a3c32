"""Prüfliste der Voraussetzungen eines Szenarios."""
