"""Ausführung von Experimentplänen (epsilon-, n- und Gitter-Sweeps)."""
