from abc import ABC, abstractmethod
from enum import Enum

class OutputType(Enum):
    """
    Attributes:
        FILE (str): Output is a directory or file written by the tool; ``output`` names it.
        TEXT (str): Output is text printed to stdout (CSV, checklist).
    """
    FILE = "file"
    TEXT = "text"

class ExitCode:
    OK = 0
    CONFIG_ERROR = 2
    NOT_CONVERGED = 3
    ASSUMPTION_FAILED = 4

class MiniTool(ABC):
    output = ""
    error_message = ""
    description = ""
    exit_code = ExitCode.OK

    def __init__(self, name, identifier, output_type=OutputType.TEXT):
        self.name = name
        self.identifier = identifier
        self.output_type = output_type
        self.input_params = {}

    def fail(self, message, exit_code=ExitCode.CONFIG_ERROR) -> bool:
        """Stores the message and exit code of a failed run; returns False for ``execute_tool``."""
        self.error_message = message
        self.exit_code = exit_code
        return False

    @abstractmethod
    def execute_tool(self, input_params: dict) -> bool:
        """
        Executes the tool with the given input parameters.

        Returns True if the tool successfully passed, False if execution failed.
        On failure ``error_message`` and ``exit_code`` describe what went wrong.
        """
        pass
