"""Python access to the protodown engine.

A Session wraps one uploaded table; parameters are replaced per section and
results come back as decoded JSON payloads or exported bytes.
"""

import json

from ._core import (
    ProtodownError,
    bh_adjust,
    engine_version,
    fit_ebayes,
    hypergeometric_upper_tail,
    sha256_hex,
    _Session,
)

__all__ = [
    "ProtodownError",
    "Session",
    "bh_adjust",
    "engine_version",
    "fit_ebayes",
    "hypergeometric_upper_tail",
    "sha256_hex",
]

__version__ = engine_version()


def _text(data):
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


class Session:
    def __init__(self, main, config=None, report=None):
        self._s = _Session(
            _text(main), json.dumps(config) if config else "", _text(report) if report is not None else None
        )

    def update(self, section, body):
        """Replace one parameter group; returns invalidated/recomputed stages."""
        return json.loads(self._s.update(section, json.dumps(body)))

    def payload(self, artifact, **query):
        return json.loads(self._s.payload(artifact, {k: str(v) for k, v in query.items()}))

    def export(self, artifact, format, **query):
        return self._s.export(artifact, format, {k: str(v) for k, v in query.items()})

    def summary(self):
        return json.loads(self._s.summary())

    def manifest(self):
        return json.loads(self._s.manifest())

    def stage_hashes(self):
        return dict(self._s.stage_hashes())
