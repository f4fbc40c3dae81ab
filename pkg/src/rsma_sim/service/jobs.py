"""In-memory background jobs for long sweeps."""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from ..config import SimConfig
from ..harness import MetricsReport, run_sweep


@dataclass
class Job:
    id: str
    config: SimConfig
    state: str = "pending"  # pending -> running -> done | error
    error: str | None = None
    created_at: float = field(default_factory=time.time)
    finished_at: float | None = None
    report: MetricsReport | None = None


class JobStore:
    def __init__(self):
        self._jobs: dict[str, Job] = {}
        self._lock = threading.Lock()

    def submit(self, cfg: SimConfig) -> Job:
        job = Job(id=uuid.uuid4().hex, config=cfg)
        with self._lock:
            self._jobs[job.id] = job
        thread = threading.Thread(target=self._run, args=(job,), daemon=True)
        thread.start()
        return job

    def _run(self, job: Job) -> None:
        with self._lock:
            job.state = "running"
        try:
            report = run_sweep(job.config)
        except Exception as exc:
            with self._lock:
                job.state = "error"
                job.error = f"{type(exc).__name__}: {exc}"
                job.finished_at = time.time()
            return
        with self._lock:
            job.report = report
            job.state = "done"
            job.finished_at = time.time()

    def get(self, job_id: str) -> Job | None:
        with self._lock:
            return self._jobs.get(job_id)

    def all(self) -> list[Job]:
        with self._lock:
            return list(self._jobs.values())
