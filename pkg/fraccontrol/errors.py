"""Fehlerhierarchie der fraccontrol-Bibliothek.

Die Tools fangen diese Ausnahmen in ``execute_tool`` ab und übersetzen sie in
``error_message`` und einen Exit-Code.
"""


class FracControlError(Exception):
    """Basisklasse aller Bibliotheksfehler."""

    exit_code = 2


class DomainError(FracControlError, ValueError):
    """Argument außerhalb des Definitionsbereichs (Skalar, Zeitpunkt, Feldform)."""


class ScenarioError(FracControlError):
    """Szenario- oder Plandatei ist unvollständig oder widersprüchlich."""


class QuadratureError(FracControlError):
    """Verfeinerung der Quadratur hat nicht konvergiert."""

    exit_code = 3


class RootBracketError(FracControlError):
    """Die Säkulargleichung ließ sich nicht einschließen."""

    exit_code = 3


class SolverError(FracControlError):
    """Nicht-endliche Werte oder gescheiterte innere Iteration im Volterra-Löser."""

    exit_code = 3


class ConvergenceError(FracControlError):
    """Ein Lauf eines Sweeps hat nicht konvergiert; ``report`` enthält dessen Bericht,
    ``completed`` die Berichte der zuvor konvergierten Läufe.
    """

    exit_code = 3

    def __init__(self, message, report=None, completed=()):
        super().__init__(message)
        self.report = report
        self.completed = list(completed)
