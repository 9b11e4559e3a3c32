import argparse
import sys

from flask import Flask
from flask_babel import Babel

from fraccontrol.logging_config import set_verbosity
from fraccontrol.settings import jobs_from_env, language_from_env
from tool_descriptions import get_description, get_use_cases
from tool_interface import ExitCode
from tools.experiment_run.experiment_run_tool import ExperimentRunTool
from tools.ml_table.ml_table_tool import MlTableTool
from tools.scenario_validate.scenario_validate_tool import ScenarioValidateTool

# Flask-Anwendung nur als Träger des Babel-Kontexts für übersetzte Meldungen
app = Flask(__name__)
app.config['BABEL_DEFAULT_LOCALE'] = 'de'
app.config['BABEL_TRANSLATION_DIRECTORIES'] = 'translations'

_selected_language = None


def get_locale():
    return _selected_language or language_from_env()


babel = Babel(app, locale_selector=get_locale)

# Registrierte Befehle
tools = {
    "run": ExperimentRunTool(),
    "validate": ScenarioValidateTool(),
    "ml": MlTableTool(),
}


def _add_command(sub, name, identifier):
    """Unterbefehl mit Beschreibung und Anwendungsfällen aus tool_descriptions."""
    cases = [f"- {case}" for case in get_use_cases(identifier)]
    epilog = "Anwendungsfälle:\n" + "\n".join(cases) if cases else None
    return sub.add_parser(name, help=str(get_description(identifier)), epilog=epilog,
                          formatter_class=argparse.RawDescriptionHelpFormatter)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fracctl",
        description="Approximative Steuerungen für semilineare fraktionale Evolutionsgleichungen.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="mehr Protokollausgabe (-vv: debug)")
    parser.add_argument("--lang", default=None, help="Sprache der Meldungen (Standard: FRACCTL_LANG oder de)")
    sub = parser.add_subparsers(dest="command", required=True)

    run = _add_command(sub, "run", "ExperimentRunTool")
    run.add_argument("plan")
    run.add_argument("--jobs", type=int, default=jobs_from_env())
    run.add_argument("--out", default=None)

    validate = _add_command(sub, "validate", "ScenarioValidateTool")
    validate.add_argument("scenario")

    ml = _add_command(sub, "ml", "MlTableTool")
    ml.add_argument("--alpha", required=True)
    ml.add_argument("--beta", required=True)
    ml.add_argument("--from", dest="x_from", required=True)
    ml.add_argument("--to", dest="x_to", required=True)
    ml.add_argument("--step", required=True)
    return parser


def collect_input_params(args):
    """Bildet die Kommandozeile auf die input_params des jeweiligen Tools ab."""
    if args.command == "run":
        return {"Plandatei": args.plan, "Parallele Läufe": args.jobs, "Ausgabeverzeichnis": args.out}
    if args.command == "validate":
        return {"Szenariodatei": args.scenario}
    return {"Alpha": args.alpha, "Beta": args.beta, "Von": args.x_from, "Bis": args.x_to, "Schritt": args.step}


def main(argv=None) -> int:
    global _selected_language
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return ExitCode.CONFIG_ERROR if e.code else ExitCode.OK

    set_verbosity(args.verbose)
    _selected_language = args.lang
    tool = tools[args.command]

    with app.app_context():
        success = tool.execute_tool(collect_input_params(args))
        if success:
            sys.stdout.write(str(tool.output))
            if tool.output and not str(tool.output).endswith("\n"):
                sys.stdout.write("\n")
            return tool.exit_code
        sys.stderr.write(str(tool.error_message).rstrip("\n") + "\n")
        return tool.exit_code or ExitCode.CONFIG_ERROR


if __name__ == '__main__':
    sys.exit(main())
