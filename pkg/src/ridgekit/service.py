"""HTTP service exposing two fitted operating points for interactive
multi-point design exploration.

Requests are stateless over an immutable :class:`Session`; identical
requests (including the seed) produce identical bodies. All responses are
versioned JSON trees rendered with the same 17-significant-digit formatter
as the file exports, so numbers agree byte-for-byte across paths.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import design, subspace
from .errors import InfeasibleRegionError
from .io import FORMAT_VERSION, OperatingPoint, load_operating_point, render_json

MAX_DESIGN_COUNT = 64
MIN_RESOLUTION = 2
MAX_RESOLUTION = 512


class ServiceConfigError(RuntimeError):
    """The service cannot start with the given model files."""


@dataclass(frozen=True)
class Session:
    """Two named operating points over a shared design space."""

    points: tuple[OperatingPoint, OperatingPoint]

    def __post_init__(self):
        if len(self.points) != 2:
            raise ServiceConfigError("a session needs exactly two operating points")
        a, b = self.points
        if a.name == b.name:
            raise ServiceConfigError(
                f"operating points must have distinct names, both are {a.name!r}"
            )
        if a.subspace.ambient_dim != b.subspace.ambient_dim:
            raise ServiceConfigError(
                f"operating points disagree on the design dimension "
                f"({a.subspace.ambient_dim} vs {b.subspace.ambient_dim})"
            )
        for p in self.points:
            if p.subspace.dim != 2 or p.surface.dim != 2:
                raise ServiceConfigError(
                    f"operating point {p.name!r} must carry a 2-dimensional "
                    f"subspace and surface"
                )

    @property
    def dimension(self) -> int:
        return self.points[0].subspace.ambient_dim

    def point(self, name: str) -> OperatingPoint:
        for p in self.points:
            if p.name == name:
                return p
        raise KeyError(name)

    def other(self, name: str) -> OperatingPoint:
        a, b = self.points
        return b if a.name == name else a


def load_session(paths) -> Session:
    """Build a session from two operating-point files, failing fast with
    diagnostics on unreadable or mismatched models."""
    if len(paths) != 2:
        raise ServiceConfigError(f"expected exactly two model files, got {len(paths)}")
    points = []
    for path in paths:
        try:
            points.append(load_operating_point(path))
        except (OSError, ValueError) as exc:
            raise ServiceConfigError(f"cannot load model {path}: {exc}") from exc
    return Session(points=tuple(points))


def contour_rows(point: OperatingPoint, resolution: int) -> list[list[float]]:
    """Row-major (y1, y2, value) triples, identical to the CLI export."""
    Y1, Y2, V = subspace.contour_grid(point.surface, resolution)
    return [
        [float(a), float(b), float(v)]
        for a, b, v in zip(Y1.ravel(), Y2.ravel(), V.ravel())
    ]


def generate_payload(
    session: Session, name: str, y, count: int, seed: int
) -> dict:
    """Design generation plus cross-projection, as a response tree."""
    point = session.point(name)
    other = session.other(name)
    try:
        batch = design.generate_designs(point.subspace, y, count, seed)
    except InfeasibleRegionError as exc:
        return {
            "version": FORMAT_VERSION,
            "point": name,
            "y": list(map(float, y)),
            "infeasible": True,
            "certificate": exc.certificate,
        }
    cross = design.crossproject(batch, other.surface, other.subspace)
    weights = np.abs(point.subspace.columns[:, 0])
    return {
        "version": FORMAT_VERSION,
        "point": name,
        "y": list(map(float, y)),
        "seed": seed,
        "infeasible": False,
        "short": batch.short,
        "designs": [
            {
                "id": i,
                "x": x,
                "weights": weights,
                "slack": batch.slacks[i],
                "strategy": batch.strategies[i],
            }
            for i, x in enumerate(batch.designs)
        ],
        "cross": {
            "point": other.name,
            "projections": [
                {
                    "id": i,
                    "y": cp.y,
                    "value": cp.value,
                    "extrapolated": cp.extrapolated,
                }
                for i, cp in enumerate(cross)
            ],
        },
    }


def session_payload(session: Session) -> dict:
    return {
        "version": FORMAT_VERSION,
        "dimension": session.dimension,
        "points": [
            {
                "name": p.name,
                "y_bounds": p.surface.y_bounds,
                "r_squared": p.surface.r_squared,
                "training_size": int(len(p.training_f)),
            }
            for p in session.points
        ],
    }


class _BadRequest(ValueError):
    pass


class ExplorerHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "ridgekit-explorer"

    @property
    def session(self) -> Session:
        return self.server.session  # type: ignore[attr-defined]

    def log_message(self, *args):  # quiet by default; tests capture bodies
        pass

    def _reply(self, code: int, tree: dict):
        body = (render_json(tree) + "\n").encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, code: int, message: str):
        self._reply(code, {"version": FORMAT_VERSION, "error": message})

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        try:
            tree = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise _BadRequest(f"request body is not valid JSON: {exc}") from exc
        if not isinstance(tree, dict):
            raise _BadRequest("request body must be a JSON object")
        return tree

    def do_GET(self):
        url = urlparse(self.path)
        try:
            if url.path == "/health":
                self._reply(200, {"version": FORMAT_VERSION, "status": "ok"})
            elif url.path == "/session":
                self._reply(200, session_payload(self.session))
            elif url.path == "/contours":
                self._contours(parse_qs(url.query))
            else:
                self._error(404, f"unknown endpoint {url.path}")
        except _BadRequest as exc:
            self._error(400, str(exc))

    def do_POST(self):
        url = urlparse(self.path)
        try:
            if url.path == "/generate":
                self._generate(self._read_body())
            elif url.path == "/project":
                self._project(self._read_body())
            else:
                self._error(404, f"unknown endpoint {url.path}")
        except _BadRequest as exc:
            self._error(400, str(exc))

    def _point_from(self, name) -> OperatingPoint:
        if not isinstance(name, str):
            raise _BadRequest("missing operating point name")
        try:
            return self.session.point(name)
        except KeyError:
            names = [p.name for p in self.session.points]
            raise _BadRequest(f"unknown point {name!r}; have {names}") from None

    def _contours(self, query: dict):
        point = self._point_from((query.get("point") or [None])[0])
        raw = (query.get("resolution") or ["64"])[0]
        try:
            resolution = int(raw)
        except ValueError:
            raise _BadRequest(f"resolution {raw!r} is not an integer") from None
        if not MIN_RESOLUTION <= resolution <= MAX_RESOLUTION:
            raise _BadRequest(
                f"resolution must lie in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], "
                f"got {resolution}"
            )
        self._reply(
            200,
            {
                "version": FORMAT_VERSION,
                "point": point.name,
                "resolution": resolution,
                "header": ["y1", "y2", "value"],
                "rows": contour_rows(point, resolution),
            },
        )

    def _project(self, body: dict):
        point = self._point_from(body.get("point"))
        designs = body.get("designs")
        if not isinstance(designs, list) or not designs:
            raise _BadRequest("designs must be a non-empty list of vectors")
        X = np.asarray(designs, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.session.dimension:
            raise _BadRequest(
                f"each design must have {self.session.dimension} coordinates"
            )
        if not np.all(np.isfinite(X)):
            raise _BadRequest("designs must be finite")
        Y = subspace.project(X, point.subspace)
        self._reply(
            200,
            {
                "version": FORMAT_VERSION,
                "point": point.name,
                "projections": Y,
            },
        )

    def _generate(self, body: dict):
        point = self._point_from(body.get("point"))
        y = body.get("y")
        if not isinstance(y, list) or len(y) != point.subspace.dim:
            raise _BadRequest(
                f"y must be a list of {point.subspace.dim} coordinates"
            )
        try:
            yv = np.asarray(y, dtype=float)
        except (TypeError, ValueError):
            raise _BadRequest("y must be numeric") from None
        if not np.all(np.isfinite(yv)):
            raise _BadRequest("y must be finite")
        count = body.get("count", 1)
        if not isinstance(count, int) or not 1 <= count <= MAX_DESIGN_COUNT:
            raise _BadRequest(
                f"count must be an integer in [1, {MAX_DESIGN_COUNT}], got {count!r}"
            )
        seed = body.get("seed", 0)
        if not isinstance(seed, int):
            raise _BadRequest("seed must be an integer")
        self._reply(200, generate_payload(self.session, point.name, yv, count, seed))


def build_server(session: Session, host: str = "127.0.0.1", port: int = 0) -> ThreadingHTTPServer:
    """Bind the service; ``port=0`` picks a free port (see
    ``server.server_address``)."""
    server = ThreadingHTTPServer((host, port), ExplorerHandler)
    server.session = session  # type: ignore[attr-defined]
    return server


def serve(paths, host: str = "127.0.0.1", port: int = 8765):
    """Load two operating-point models and serve until interrupted."""
    session = load_session(paths)
    server = build_server(session, host, port)
    try:
        server.serve_forever()
    finally:
        server.server_close()
