from flask_babel import lazy_gettext as _

from fraccontrol.errors import FracControlError
from fraccontrol.scenario import audit_scenario, read_json
from fraccontrol.settings import make_rng
from tool_interface import ExitCode, MiniTool, OutputType


class ScenarioValidateTool(MiniTool):
    name = _("Szenario prüfen")

    def __init__(self):
        super().__init__(self.name, "ScenarioValidateTool", OutputType.TEXT)
        self.input_params = {
            "Szenariodatei": "file",
        }
        self.items = []

    def format_checklist(self, items):
        lines = []
        for item in items:
            status = _("OK") if item.ok else _("VERLETZT")
            lines.append(f"[{status}] {item.label} {item.detail}")
        return "\n".join(lines) + "\n"

    def execute_tool(self, input_params: dict) -> bool:
        try:
            path = input_params.get("Szenariodatei")
            if not path:
                return self.fail(_("Keine Szenariodatei angegeben."))

            raw = read_json(path)
            self.items = audit_scenario(raw, make_rng())
            checklist = self.format_checklist(self.items)
            violated = [item.label for item in self.items if not item.ok]
            if violated:
                self.output = checklist
                return self.fail(_("Verletzte Voraussetzungen: {0}").format(", ".join(violated)) + "\n" + checklist)

            self.output = checklist
            self.exit_code = ExitCode.OK
            return True

        except FracControlError as e:
            return self.fail(str(e))
        except Exception as e:
            return self.fail(_("Fehler beim Prüfen: {0}").format(str(e)))
