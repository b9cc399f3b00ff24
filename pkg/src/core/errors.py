"""
ASRAM Errors Module
Exception hierarchy shared by the core modules and the CLI
"""

from typing import List, Optional


class AsramError(Exception):
    """Base class for every error raised by the toolkit"""


class ConfigError(AsramError):
    """Invalid settings file or run limits"""


class Diagnostic:
    """A positioned problem found while reading source text"""

    def __init__(self, line: int, column: int, message: str):
        self.line = line
        self.column = column
        self.message = message

    def to_dict(self) -> dict:
        return {'line': self.line, 'column': self.column, 'message': self.message}

    def __str__(self):
        return f"{self.line}:{self.column}: {self.message}"

    def __repr__(self):
        return f"Diagnostic(line={self.line}, column={self.column}, message='{self.message}')"


class AssemblyError(AsramError):
    """Raised when .asr text cannot be parsed; carries every diagnostic found"""

    def __init__(self, diagnostics: List[Diagnostic]):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class ValidationError(AsramError):
    """Raised when a program is executed without passing validation"""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class FormulaSyntaxError(AsramError):
    """Formula text that does not match the grammar, or uses undeclared variables"""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")


class OracleSpecError(AsramError):
    """Malformed oracle specification string or plan/fixed file"""


class OracleExhausted(AsramError):
    """An oracle family was asked for more draws than it can provide"""


class ResourceRefusal(AsramError):
    """A request whose cost exceeds a configured cap was refused up front"""

    def __init__(self, message: str, limit: Optional[int] = None):
        self.limit = limit
        super().__init__(message)


class MachineFault(AsramError):
    """
    Raised by primitive operations; the interpreter turns it into a fault status

    Args:
        code: One of the FaultCode values
    """

    def __init__(self, code, detail: str = ""):
        self.code = code
        self.detail = detail
        super().__init__(f"{code.value}: {detail}" if detail else code.value)
