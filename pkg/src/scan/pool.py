import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from src.utils import console
from src.utils.errors import LabError, ValidationError


@dataclass
class GridFailure:
    index: int
    item: Any
    error: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"index": self.index, "item": self.item, "error": self.error, "diagnostics": self.diagnostics}


class GridPool:
    # runs one function over independent grid points, results come back in grid order
    def __init__(self, threads: int = 1):
        if threads < 1:
            raise ValidationError("threads must be >= 1")
        self.threads = threads
        self.failures: List[GridFailure] = []
        self.lock = threading.Lock()

    def _guarded(self, fn: Callable[[Any], Any], index: int, item: Any) -> Optional[Any]:
        try:
            return fn(item)
        except LabError as exc:
            # a failed grid point is recorded, the scan goes on
            with self.lock:
                self.failures.append(GridFailure(index, item, str(exc), dict(exc.diagnostics)))
            console.debug("SCAN", f"grid point {index} failed: {exc}")
            return None

    def map(self, fn: Callable[[Any], Any], items: Sequence[Any]) -> List[Optional[Any]]:
        if self.threads == 1 or len(items) < 2:
            results = [self._guarded(fn, i, item) for i, item in enumerate(items)]
        else:
            with ThreadPoolExecutor(max_workers=self.threads) as pool:
                results = list(pool.map(lambda pair: self._guarded(fn, *pair), enumerate(items)))
        self.failures.sort(key=lambda f: f.index)
        if self.failures:
            console.warn("SCAN", f"{len(self.failures)} of {len(items)} grid points failed")
        return results
