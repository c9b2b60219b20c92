class InputError(ValueError):
    """Malformed or inconsistent input data (files, names, proofs)."""


class TPTPSyntaxError(InputError):
    def __init__(self, message, line, column, expected=None):
        self.line = line
        self.column = column
        self.expected = expected
        where = f"line {line}, column {column}"
        if expected:
            message = f"{message} (expected {expected})"
        super().__init__(f"{where}: {message}")
