from __future__ import annotations


class HarnessError(Exception):
    """Base class for every error the harness raises on purpose.

    ``code`` is a stable numeric identifier printed by the CLI; ``exit_status`` is the
    process status the CLI maps the error to (1 for usage problems, 2 for runtime failures).
    """

    code: int = 100
    exit_status: int = 2

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message

    def one_line(self) -> str:
        text = " ".join(self.message.split())
        return f"E{self.code}: {text}"


class UsageError(HarnessError):
    code = 1
    exit_status = 1
