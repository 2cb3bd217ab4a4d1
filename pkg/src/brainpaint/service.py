"""HTTP render service: submit a CSV plus config, poll the job, download a ZIP.

Jobs and their artifacts live under a single data directory, one directory
per job, so a restarted service keeps serving completed, unexpired jobs.
Rendering happens on a worker thread pool consuming a bounded queue; HTTP
handlers never block on a render. No authentication; the queue bound is the
rate limit.

Environment: BRAINPAINT_ADDR (host:port), BRAINPAINT_DATA_DIR,
BRAINPAINT_ASSET_ROOT, BRAINPAINT_RETENTION_SECS, BRAINPAINT_WORKERS,
BRAINPAINT_QUEUE_CAP, BRAINPAINT_MAX_CSV_BYTES, BRAINPAINT_STATIC_DIR.
"""

from __future__ import annotations

import io
import json
import os
import queue
import threading
import time
import uuid
import zipfile
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from fastapi import FastAPI, Form, UploadFile
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles

from .atlas import BUILTIN_ATLASES, apply_custom_mapping, load_atlas, load_manifest
from .config import RunConfig, echo_config, load_config_data
from .errors import AtlasError, BrainPaintError, ConfigError, IngestError
from .gradient import DEFAULT_CONTROLS, NAMED_COLORS
from .ingest import check_range, parse_biomarker_csv
from .pipeline import run_pipeline
from .scene import VIEW_PRESETS

DEFAULT_MAX_CSV_BYTES = 5 * 1024 * 1024
DEFAULT_RETENTION_SECS = 3600
DEFAULT_QUEUE_CAP = 16

_FIXED_ZIP_TIME = (1980, 1, 1, 0, 0, 0)


def _error_body(code: str, message: str, details: list | None = None) -> dict:
    return {"code": code, "message": message, "details": details or []}


def _error(status: int, code: str, message: str, details: list | None = None) -> JSONResponse:
    return JSONResponse(status_code=status, content=_error_body(code, message, details))


@dataclass
class RenderJob:
    id: str
    state: str  # queued | running | done | failed
    created_at: float
    expires_at: float
    error: dict | None = None
    manifest: dict | None = None

    def public(self) -> dict:
        out = {
            "id": self.id,
            "state": self.state,
            "created_at": self.created_at,
            "expires_at": self.expires_at,
        }
        if self.state == "done" and self.manifest is not None:
            out["manifest"] = self.manifest
        if self.state == "failed" and self.error is not None:
            out["error"] = self.error
        return out


class JobStore:
    """Disk-backed job registry; job state mutations are atomic under a lock."""

    def __init__(self, data_dir: Path, retention_secs: float):
        self.root = Path(data_dir) / "jobs"
        self.root.mkdir(parents=True, exist_ok=True)
        self.retention = retention_secs
        self.lock = threading.RLock()
        self.jobs: dict[str, RenderJob] = {}
        self._recover()

    def _job_file(self, job_id: str) -> Path:
        return self.root / job_id / "job.json"

    def job_dir(self, job_id: str) -> Path:
        return self.root / job_id

    def output_dir(self, job_id: str) -> Path:
        return self.job_dir(job_id) / "output"

    def _persist(self, job: RenderJob) -> None:
        self._job_file(job.id).write_text(json.dumps(asdict(job)), encoding="utf-8")

    def _recover(self) -> None:
        now = time.time()
        for job_file in self.root.glob("*/job.json"):
            try:
                data = json.loads(job_file.read_text(encoding="utf-8"))
                job = RenderJob(**data)
            except (ValueError, TypeError):
                continue
            if job.expires_at <= now:
                self._delete(job.id)
                continue
            if job.state in ("queued", "running"):
                job.state = "failed"
                job.error = _error_body("interrupted", "service restarted mid-render")
                self._persist(job)
            self.jobs[job.id] = job

    def _delete(self, job_id: str) -> None:
        import shutil

        shutil.rmtree(self.job_dir(job_id), ignore_errors=True)
        self.jobs.pop(job_id, None)

    def sweep(self) -> None:
        now = time.time()
        with self.lock:
            for job_id in [j.id for j in self.jobs.values() if j.expires_at <= now]:
                self._delete(job_id)

    def create(self) -> RenderJob:
        with self.lock:
            job_id = uuid.uuid4().hex
            now = time.time()
            job = RenderJob(
                id=job_id, state="queued", created_at=now, expires_at=now + self.retention
            )
            self.job_dir(job_id).mkdir(parents=True)
            self.jobs[job_id] = job
            self._persist(job)
            return job

    def get(self, job_id: str) -> RenderJob | None:
        self.sweep()
        with self.lock:
            return self.jobs.get(job_id)

    def update(self, job_id: str, **changes) -> None:
        with self.lock:
            job = self.jobs[job_id]
            for key, value in changes.items():
                setattr(job, key, value)
            self._persist(job)


def _parse_request_config(config_text: str) -> tuple[RunConfig, dict]:
    """Client config with server-owned path keys stripped before validation."""
    try:
        data = json.loads(config_text) if config_text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    data.pop("asset_root", None)
    data.pop("output_dir", None)
    return load_config_data(data), data


def create_app(
    data_dir: Path | str,
    asset_root: Path | str,
    *,
    workers: int = 1,
    queue_cap: int = DEFAULT_QUEUE_CAP,
    retention_secs: float = DEFAULT_RETENTION_SECS,
    max_csv_bytes: int = DEFAULT_MAX_CSV_BYTES,
    static_dir: Path | str | None = None,
) -> FastAPI:
    app = FastAPI(title="brainpaint", version="0.1.0")
    store = JobStore(Path(data_dir), retention_secs)
    work: queue.Queue[str] = queue.Queue(maxsize=queue_cap)
    asset_root = Path(asset_root)

    def worker_loop():
        while True:
            job_id = work.get()
            if job_id is None:
                return
            try:
                store.update(job_id, state="running")
                job_dir = store.job_dir(job_id)
                cfg, _ = _parse_request_config((job_dir / "config.json").read_text("utf-8"))
                cfg = replace(cfg, asset_root=asset_root, output_dir=store.output_dir(job_id))
                manifest = run_pipeline(cfg, job_dir / "input.csv", jobs=1)
                store.update(job_id, state="done", manifest=manifest)
            except BrainPaintError as exc:
                store.update(
                    job_id, state="failed", error=_error_body("render-failed", str(exc))
                )
            except Exception as exc:  # keep the worker alive
                store.update(
                    job_id,
                    state="failed",
                    error=_error_body("internal", f"{type(exc).__name__}: {exc}"),
                )
            finally:
                work.task_done()

    threads: list[threading.Thread] = []

    @app.on_event("startup")
    def start_workers():
        for _ in range(max(workers, 1)):
            t = threading.Thread(target=worker_loop, daemon=True)
            t.start()
            threads.append(t)

    @app.on_event("shutdown")
    def stop_workers():
        for _ in threads:
            work.put(None)

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.get("/api/atlases")
    def atlases():
        out = []
        for name in BUILTIN_ATLASES:
            atlas = load_manifest(name)
            out.append(
                {
                    "name": name,
                    "regions": [
                        {
                            "canonical_name": r.canonical_name,
                            "hemisphere": r.hemisphere,
                            "klass": r.klass,
                        }
                        for r in atlas.regions
                    ],
                }
            )
        return {"atlases": out}

    @app.get("/api/presets")
    def presets():
        return {
            "gradients": {
                "default": ["#{:02x}{:02x}{:02x}".format(*c) for c in DEFAULT_CONTROLS]
            },
            "named_colors": {k: list(v) for k, v in NAMED_COLORS.items()},
            "views": sorted(VIEW_PRESETS),
            "defaults": echo_config(RunConfig()),
        }

    @app.post("/api/render", status_code=202)
    def submit(
        csv: UploadFile,
        config: str = Form(default="{}"),
        validate_only: bool = Form(default=False),
    ):
        raw = csv.file.read(max_csv_bytes + 1)
        if len(raw) > max_csv_bytes:
            return _error(413, "too-large", f"CSV exceeds the {max_csv_bytes}-byte cap")
        try:
            text = raw.decode("utf-8-sig")
        except UnicodeDecodeError:
            return _error(400, "invalid-input", "CSV is not valid UTF-8")

        try:
            cfg, client_data = _parse_request_config(config)
        except ConfigError as exc:
            return _error(400, "config-error", str(exc))

        try:
            atlas = load_atlas(cfg.atlas, asset_root)
            if cfg.region_mapping:
                atlas = apply_custom_mapping(atlas, cfg.region_mapping)
            table, warnings = parse_biomarker_csv(text, atlas)
            warnings += check_range(table, cfg.gradient)
        except (IngestError, AtlasError) as exc:
            details = []
            if isinstance(exc, IngestError) and (exc.row is not None or exc.column is not None):
                details.append({"row": exc.row, "column": exc.column})
            return _error(400, "invalid-input", str(exc), details)

        if validate_only:
            return JSONResponse(
                status_code=200,
                content={
                    "valid": True,
                    "rows": [r.image_name for r in table.rows],
                    "regions": list(table.region_order),
                    "warnings": [w.as_dict() for w in warnings],
                },
            )

        store.sweep()
        job = store.create()
        job_dir = store.job_dir(job.id)
        (job_dir / "input.csv").write_bytes(raw)
        (job_dir / "config.json").write_text(json.dumps(client_data), encoding="utf-8")
        try:
            work.put_nowait(job.id)
        except queue.Full:
            store.update(job.id, expires_at=0.0)
            store.sweep()
            return _error(429, "queue-full", "render queue is full, retry later")
        return JSONResponse(status_code=202, content={"job_id": job.id})

    @app.get("/api/jobs/{job_id}")
    def job_status(job_id: str):
        job = store.get(job_id)
        if job is None:
            return _error(404, "unknown-job", f"no job {job_id!r} (unknown or expired)")
        return job.public()

    @app.get("/api/jobs/{job_id}/archive")
    def job_archive(job_id: str):
        job = store.get(job_id)
        if job is None:
            return _error(404, "unknown-job", f"no job {job_id!r} (unknown or expired)")
        if job.state != "done":
            return _error(409, "not-finished", f"job is {job.state}")
        out_dir = store.output_dir(job_id)
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for path in sorted(out_dir.iterdir()):
                info = zipfile.ZipInfo(path.name, date_time=_FIXED_ZIP_TIME)
                info.compress_type = zipfile.ZIP_DEFLATED
                info.external_attr = 0o644 << 16
                zf.writestr(info, path.read_bytes(), compresslevel=6)
        return Response(
            content=buf.getvalue(),
            media_type="application/zip",
            headers={"Content-Disposition": f'attachment; filename="{job_id}.zip"'},
        )

    static = Path(static_dir) if static_dir else None
    if static and static.is_dir():
        app.mount("/", StaticFiles(directory=static, html=True), name="ui")

    return app


def service_settings_from_env() -> dict:
    addr = os.environ.get("BRAINPAINT_ADDR", "127.0.0.1:8000")
    host, _, port = addr.rpartition(":")
    static = os.environ.get("BRAINPAINT_STATIC_DIR")
    return {
        "addr": (host or "127.0.0.1", int(port)),
        "data_dir": Path(os.environ.get("BRAINPAINT_DATA_DIR", "brainpaint-data")),
        "asset_root": Path(os.environ.get("BRAINPAINT_ASSET_ROOT", "assets")),
        "workers": int(os.environ.get("BRAINPAINT_WORKERS", "1")),
        "queue_cap": int(os.environ.get("BRAINPAINT_QUEUE_CAP", str(DEFAULT_QUEUE_CAP))),
        "retention_secs": float(
            os.environ.get("BRAINPAINT_RETENTION_SECS", str(DEFAULT_RETENTION_SECS))
        ),
        "max_csv_bytes": int(
            os.environ.get("BRAINPAINT_MAX_CSV_BYTES", str(DEFAULT_MAX_CSV_BYTES))
        ),
        "static_dir": Path(static) if static else None,
    }
