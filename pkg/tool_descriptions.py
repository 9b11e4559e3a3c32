# tool_descriptions.py
# Beschreibungen und Anwendungsfälle der fracctl-Befehle
from flask_babel import lazy_gettext as _

TOOL_DESCRIPTIONS = {
    "ExperimentRunTool": {
        "description": _("Führt einen Experimentplan aus: epsilon-, n- und Gitter-Sweeps für ein Szenario, mit Berichten je Lauf und einer CSV-Zusammenfassung."),
        "use_cases": [_("Nachweis der partiell-approximativen Steuerbarkeit für ein Szenario"), _("Studie des Fehlers in Abhängigkeit von epsilon"), _("Konvergenz des approximierenden Verfahrens in n")]
    },
    "ScenarioValidateTool": {
        "description": _("Prüft eine Szenario-Datei gegen die Voraussetzungen (q), (S), (G)(b), (F)(b), (B) und (AC) und gibt eine Prüfliste aus."),
        "use_cases": [_("Vorabprüfung eigener Szenarien"), _("Fehlersuche bei nichtlokalen Bedingungen"), _("Kontrolle der linearen Steuerbarkeit der Abschneidung")]
    },
    "MlTableTool": {
        "description": _("Tabelliert die Mittag-Leffler-Funktion E_{alpha,beta}(x) auf einem Gitter x <= 0 als CSV."),
        "use_cases": [_("Fehlersuche in Kernwerten"), _("Vergleich mit externen Referenzwerten")]
    },
}


def get_description(tool_name):
    """Returns the description for a given tool name"""
    tool_info = TOOL_DESCRIPTIONS.get(tool_name, {})
    return tool_info.get("description", _("Keine Beschreibung verfügbar."))


def get_use_cases(tool_name):
    """Returns the use cases for a given tool name"""
    tool_info = TOOL_DESCRIPTIONS.get(tool_name, {})
    return tool_info.get("use_cases", [])
