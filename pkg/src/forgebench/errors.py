"""Exception types raised by the harness."""


class ForgebenchError(Exception):
    """Base class for all harness errors."""


class ManifestError(ForgebenchError):
    """Invalid dataset manifest (bad line, duplicate id, bad label/split)."""


class FrameError(ForgebenchError):
    """Frame file missing, undecodable, or inconsistent with its record."""


class CodecError(ForgebenchError):
    """External codec tool missing, failing, or violating its contract."""


class ScorerProtocolError(ForgebenchError):
    """Scorer subprocess violated the stdio protocol."""


class ScoreFileError(ForgebenchError):
    """Malformed or inconsistent precomputed score CSV."""


class ConfigError(ForgebenchError):
    """Invalid run configuration."""


class ReportError(ForgebenchError):
    """Inconsistent evaluation report inputs."""
