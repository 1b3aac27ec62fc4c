"""Exception hierarchy. Every error carries the short code used in CLI output."""


class FillwrightError(Exception):
    code = "E_RUNTIME"

    def __str__(self) -> str:
        return f"{self.code}: {super().__str__()}"


class ParseError(FillwrightError):
    code = "E_PARSE"


class ValidationError(FillwrightError):
    code = "E_VALIDATE"


class LayoutIOError(FillwrightError):
    code = "E_IO"


class RulesError(FillwrightError):
    code = "E_RULES"


class GeometryError(FillwrightError):
    code = "E_GEOM"


class StackError(FillwrightError):
    code = "E_STACK"


class NoNetError(FillwrightError):
    code = "E_NONET"


class ParamsError(FillwrightError):
    code = "E_PARAMS"
