"""Rate-limited, idempotent fetch client for card records and images.

The client is endpoint-agnostic: URL templates with an {id} placeholder
point it at any card-database mirror. Fetched files land in the output
directory only — images are never embedded in the repository.
"""

from __future__ import annotations

import time
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError


@dataclass(frozen=True)
class FetchConfig:
    record_url_template: str
    image_url_template: str | None = None
    rate_limit: float = 2.0           # requests per second
    timeout: float = 10.0

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ConfigError(f"rate_limit must be > 0, got {self.rate_limit}")
        if "{id}" not in self.record_url_template:
            raise ConfigError("record_url_template needs an {id} placeholder")


@dataclass
class FetchReport:
    requested: int = 0
    written: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)
    errors: dict[str, str] = field(default_factory=dict)
    cursor: int = 0                   # index of the first unattempted id
    complete: bool = True

    def summary(self) -> str:
        status = "complete" if self.complete else f"interrupted at {self.cursor}"
        return (f"fetch {status}: {len(self.written)} written, {len(self.skipped)} skipped, "
                f"{len(self.errors)} errors of {self.requested} requested")


class _RateLimiter:
    def __init__(self, per_second: float):
        self.interval = 1.0 / per_second
        self.last = 0.0

    def wait(self) -> None:
        now = time.monotonic()
        delay = self.last + self.interval - now
        if delay > 0:
            time.sleep(delay)
        self.last = time.monotonic()


def _get(url: str, timeout: float) -> bytes:
    with urllib.request.urlopen(url, timeout=timeout) as response:
        return response.read()


def fetch_card_data(ids: list[str], config: FetchConfig, out: str | Path) -> FetchReport:
    """Fetch records (and optionally images) for the given card ids.

    Already-fetched ids are skipped, so re-runs are no-ops. HTTP errors are
    logged per card; a network-level failure stops the session and returns a
    partial report whose cursor makes the run resumable.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    limiter = _RateLimiter(config.rate_limit)
    report = FetchReport(requested=len(ids))
    for i, card_id in enumerate(ids):
        report.cursor = i
        record_path = out / f"{card_id}.json"
        image_path = out / f"{card_id}.jpg"
        need_record = not record_path.exists()
        need_image = config.image_url_template is not None and not image_path.exists()
        if not need_record and not need_image:
            report.skipped.append(card_id)
            continue
        try:
            if need_record:
                limiter.wait()
                blob = _get(config.record_url_template.format(id=card_id), config.timeout)
                tmp = record_path.with_suffix(".json.part")
                tmp.write_bytes(blob)
                tmp.rename(record_path)
            if need_image:
                limiter.wait()
                blob = _get(config.image_url_template.format(id=card_id), config.timeout)
                tmp = image_path.with_suffix(".jpg.part")
                tmp.write_bytes(blob)
                tmp.rename(image_path)
            report.written.append(card_id)
        except urllib.error.HTTPError as exc:
            report.errors[card_id] = f"HTTP {exc.code}"
        except (urllib.error.URLError, OSError) as exc:
            # Connection-level failure: stop here, resumable at this cursor.
            report.errors[card_id] = str(exc)
            report.complete = False
            return report
    report.cursor = len(ids)
    return report
