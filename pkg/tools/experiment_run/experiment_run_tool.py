from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

from flask_babel import lazy_gettext as _

from fraccontrol.errors import ConvergenceError, FracControlError, ScenarioError
from fraccontrol.logging_config import get_logger
from fraccontrol.reports import (
    control_csv,
    format_n,
    gramian_csv,
    report_to_dict,
    run_stem,
    summary_csv,
    summary_row,
    trajectory_csv,
    write_json_atomic,
    write_text_atomic,
)
from fraccontrol.scenario import load_scenario
from fraccontrol.solver import FixedPointConfig, approximating_sweep, picard_solve
from fraccontrol.varmin import assemble_gramian, check_linear_pac
from tool_interface import ExitCode, MiniTool, OutputType
from tools.experiment_run.experiment_plan import load_plan

logger = get_logger("run")


class ExperimentRunTool(MiniTool):
    name = _("Experiment ausführen")

    def __init__(self):
        super().__init__(self.name, "ExperimentRunTool", OutputType.FILE)
        self.input_params = {
            "Plandatei": "file",
            "Parallele Läufe": "int",
            "Ausgabeverzeichnis": "text",
        }
        self.rows = []
        self.min_gram_eig = None

    def run_group(self, scenario, gram, plan, epsilon, grid_T):
        """Ein epsilon auf einem Gitter, alle n aus dem Plan; liefert die Berichte."""
        cfg = FixedPointConfig(
            epsilon=epsilon,
            smoothing_n=plan.n_list[0],
            grid_T=grid_T,
            max_picard=plan.max_picard,
            picard_tol=plan.picard_tol,
            relaxation=plan.relaxation,
        )
        if len(plan.n_list) == 1:
            return [picard_solve(scenario.model, scenario.gspec, scenario.fspec, cfg, gram)], None
        try:
            final = approximating_sweep(scenario.model, scenario.gspec, scenario.fspec, cfg, gram, plan.n_list)
        except ConvergenceError as e:
            logger.warning(f"sweep aborted eps={epsilon:.1e} T={grid_T}: {e}")
            return e.completed + [e.report], None
        return final.members, final

    def write_run(self, out_dir, report):
        stem = run_stem(report.epsilon, report.smoothing_n, report.grid_T)
        write_json_atomic(out_dir / f"{stem}.json", report_to_dict(report, self.min_gram_eig))
        write_text_atomic(out_dir / f"{stem}_trajectory.csv", trajectory_csv(report.trajectory))
        write_text_atomic(out_dir / f"{stem}_control.csv", control_csv(report.law, report.trajectory.grid))

    def execute_tool(self, input_params: dict) -> bool:
        try:
            plan_path = input_params.get("Plandatei")
            if not plan_path:
                return self.fail(_("Keine Plandatei angegeben."))
            try:
                jobs = int(input_params.get("Parallele Läufe") or 1)
            except (TypeError, ValueError):
                return self.fail(_("Die Anzahl paralleler Läufe muss eine ganze Zahl sein."))
            if jobs < 1:
                return self.fail(_("Die Anzahl paralleler Läufe muss mindestens 1 sein."))

            try:
                plan = load_plan(plan_path, input_params.get("Ausgabeverzeichnis") or None)
                scenario = load_scenario(plan.scenario)
            except ScenarioError as e:
                return self.fail(_("Konfigurationsfehler: {0}").format(str(e)))
            if not plan.grid_T:
                plan = replace(plan, grid_T=(scenario.grid_T,))

            out_dir = plan.out
            out_dir.mkdir(parents=True, exist_ok=True)

            gram = assemble_gramian(scenario.model)
            self.min_gram_eig, controllable = check_linear_pac(gram)
            write_text_atomic(out_dir / "gramian.csv", gramian_csv(gram))
            write_json_atomic(out_dir / "pac_check.json", {
                "scenario": scenario.name,
                "min_gram_eig": self.min_gram_eig,
                "controllable": controllable,
                "quad_nodes": gram.quad_nodes,
            })
            if not controllable:
                logger.error(f"linear controllability check failed min_gram_eig={self.min_gram_eig:.3e}")
                return self.fail(
                    _("Voraussetzung (AC) verletzt: kleinster Eigenwert der Gramschen Matrix {0:.3e}").format(
                        self.min_gram_eig),
                    ExitCode.ASSUMPTION_FAILED)

            groups = [(eps, T) for T in plan.grid_T for eps in plan.epsilons]
            self.rows = []
            sweeps = []
            all_ok = True
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = [pool.submit(self.run_group, scenario, gram, plan, eps, T) for eps, T in groups]
                for (eps, T), future in zip(groups, futures):
                    reports, sweep = future.result()
                    for report in reports:
                        self.write_run(out_dir, report)
                        self.rows.append(summary_row(report, self.min_gram_eig))
                        all_ok = all_ok and report.converged and report.within_bound
                    if len(reports) < len(plan.n_list):
                        all_ok = False
                    if sweep is not None:
                        sweeps.append({
                            "epsilon": eps,
                            "grid_T": T,
                            "n_trace": [[format_n(n), gap] for n, gap in sweep.n_trace],
                            "limit_gaps": [[format_n(n), gap] for n, gap in sweep.limit_gaps],
                        })

            write_text_atomic(out_dir / "summary.csv", summary_csv(self.rows))
            if sweeps:
                write_json_atomic(out_dir / "sweeps.json", sweeps)

            self.output = str(out_dir)
            if not all_ok:
                return self.fail(
                    _("Nicht alle Läufe haben konvergiert oder die Fehlerschranke eingehalten; siehe {0}").format(
                        out_dir / "summary.csv"),
                    ExitCode.NOT_CONVERGED)
            self.exit_code = ExitCode.OK
            return True

        except FracControlError as e:
            code = ExitCode.CONFIG_ERROR if e.exit_code == 2 else ExitCode.NOT_CONVERGED
            return self.fail(str(e), code)
        except Exception as e:
            return self.fail(_("Fehler bei der Ausführung: {0}").format(str(e)), ExitCode.NOT_CONVERGED)
