import math

from flask_babel import lazy_gettext as _

from fraccontrol.errors import DomainError
from fraccontrol.mittag import ml
from tool_interface import ExitCode, MiniTool, OutputType


class MlTableTool(MiniTool):
    name = _("Mittag-Leffler-Tabelle")

    def __init__(self):
        super().__init__(self.name, "MlTableTool", OutputType.TEXT)
        self.input_params = {
            "Alpha": "float",
            "Beta": "float",
            "Von": "float",
            "Bis": "float",
            "Schritt": "float",
        }

    def parse_number(self, input_params, key):
        """Liest einen Parameter als endliche Gleitkommazahl; (ok, wert, fehler)."""
        raw = input_params.get(key)
        if raw is None or raw == "":
            return False, None, _("Parameter '{0}' fehlt.").format(key)
        try:
            value = float(raw)
        except (TypeError, ValueError):
            return False, None, _("Parameter '{0}' ist keine Zahl: {1}").format(key, raw)
        if not math.isfinite(value):
            return False, None, _("Parameter '{0}' ist nicht endlich.").format(key)
        return True, value, ""

    def grid_points(self, x_from, x_to, step):
        if x_from > x_to:
            return []
        count = int(math.floor((x_to - x_from) / step + 1e-9)) + 1
        return [x_from + i * step for i in range(count)]

    def execute_tool(self, input_params: dict) -> bool:
        try:
            values = {}
            for key in self.input_params:
                ok, value, error = self.parse_number(input_params, key)
                if not ok:
                    return self.fail(error)
                values[key] = value

            if values["Schritt"] <= 0:
                return self.fail(_("Die Schrittweite muss positiv sein."))

            lines = ["x,ml"]
            for x in self.grid_points(values["Von"], values["Bis"], values["Schritt"]):
                lines.append(f"{x:.17g},{ml(values['Alpha'], values['Beta'], x):.17g}")
            self.output = "\n".join(lines) + "\n"
            self.exit_code = ExitCode.OK
            return True

        except DomainError as e:
            return self.fail(_("Ungültiger Wertebereich: {0}").format(str(e)))
        except Exception as e:
            return self.fail(str(e))
