import os
import time
import datetime
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Any, Iterator, Optional


class LogLevel(Enum):
    SILENT = 0
    WARNING = 1
    INFO = 2
    DEBUG = 3


class Logger:
    """
    File logger configured from environment variables:
    - $FRACRB_LOG_FILE: Path to the log file (unset disables logging)
    - $FRACRB_LOG_LEVEL: Verbosity (0=silent, 1=warning, 2=info, 3=debug)
    """

    def __init__(self) -> None:
        self.log_file_path: Optional[str] = os.getenv("FRACRB_LOG_FILE")
        try:
            self.log_level: int = int(os.getenv("FRACRB_LOG_LEVEL", "0"))
        except ValueError:
            self.log_level = 0

        if self.log_level not in [level.value for level in LogLevel]:
            self.log_level = 0

        if self.log_file_path:
            try:
                Path(self.log_file_path).parent.mkdir(parents=True, exist_ok=True)
            except OSError:
                # unwritable location; _write_log swallows the same failure later
                ...

    def _write_log(self, level: LogLevel, message: str) -> None:
        if self.log_level < level.value:
            return
        if not self.log_file_path:
            return

        timestamp = datetime.datetime.now().strftime("%Y-%m-%d %H:%M:%S")
        log_entry = f"[{timestamp}] {level.name}: {message}\n"

        try:
            with open(self.log_file_path, "a", encoding="utf-8") as f:
                f.write(log_entry)
        except OSError:
            ...

    def log_warning(self, message: str) -> None:
        self._write_log(LogLevel.WARNING, message)

    def log_info(self, message: str) -> None:
        self._write_log(LogLevel.INFO, message)

    def log_debug(self, message: str) -> None:
        self._write_log(LogLevel.DEBUG, message)

    @contextmanager
    def timed(self, label: str) -> Iterator[None]:
        """Log the wall time spent inside the block at INFO level."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed_ms = (time.perf_counter() - start) * 1000
            self.log_info(f"{label} took {elapsed_ms:.1f} ms")

    def get_config(self) -> dict[str, Any]:
        return {
            "log_file": self.log_file_path,
            "log_level": self.log_level,
            "log_level_name": LogLevel(self.log_level).name,
        }


logger = Logger()
