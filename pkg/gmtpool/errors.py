from __future__ import annotations

"""Centralised error types for gmtpool.

Each custom error is JSON-serialisable via ``to_dict`` so the CLI can log
machine-readable diagnostics (offending field, file, line, shapes) instead of
free-form strings.
"""

from typing import Any, Dict, Optional


class GmtError(Exception):
    """Base class for all structured gmtpool exceptions."""

    code: str = "GMT_ERROR"
    status: str = "error"

    def __init__(self, message: str, *, data: Optional[Dict[str, Any]] = None) -> None:  # noqa: D401 – simple init
        super().__init__(message)
        self.message = message
        self.data = data or {}

    # ------------------------------------------------------------------
    def to_dict(self) -> Dict[str, Any]:  # noqa: D401 – utility
        return {
            "status": self.status,
            "code": self.code,
            "message": self.message,
            "data": self.data,
        }

    def __str__(self) -> str:  # noqa: D401 – friendly repr
        return f"{self.code}: {self.message}"


class DimensionError(GmtError):
    code = "SHAPE_ERROR"

    @classmethod
    def mismatch(cls, op: str, *shapes: tuple) -> "DimensionError":
        rendered = " vs ".join(str(tuple(s)) for s in shapes)
        return cls(f"{op}: incompatible shapes {rendered}", data={"op": op, "shapes": [list(s) for s in shapes]})


class UsageError(GmtError):
    code = "USAGE_ERROR"


class ConfigError(UsageError):
    code = "CONFIG_ERROR"

    def __init__(self, message: str, *, field: Optional[str] = None, data: Optional[Dict[str, Any]] = None) -> None:
        payload = dict(data or {})
        if field is not None:
            payload["field"] = field
        super().__init__(message, data=payload)
        self.field = field


class ParameterError(GmtError):
    code = "PARAMETER_ERROR"


class InvalidInputError(GmtError):
    code = "INVALID_INPUT"


class LoadError(GmtError):
    code = "LOAD_ERROR"

    def __init__(self, message: str, *, file: Optional[str] = None, line: Optional[int] = None) -> None:
        where = f"{file}:{line}" if file and line else (file or "")
        super().__init__(f"{message} ({where})" if where else message, data={"file": file, "line": line})
        self.file = file
        self.line = line


class SplitError(GmtError):
    code = "SPLIT_ERROR"


class BatchError(GmtError):
    code = "BATCH_ERROR"


class UnsupportedMetricError(GmtError):
    code = "UNSUPPORTED_METRIC"
