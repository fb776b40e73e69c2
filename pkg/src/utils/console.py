"""console output for the lab

[TAG] lines with colours on stderr.
reports never go through here, only diagnostics.
"""
import sys
import threading
from termcolor import colored

_VERBOSE = False
_WARNINGS = 0
_lock = threading.Lock()


def set_verbose(enabled: bool) -> None:
    global _VERBOSE
    _VERBOSE = enabled

def _emit(tag: str, message: str, color: str) -> None:
    with _lock:
        print(colored(f"[{tag}] {message}", color), file=sys.stderr)


def info(tag: str, message: str) -> None:
    _emit(tag, message, "cyan")


def success(tag: str, message: str) -> None:
    _emit(tag, message, "green")


def warn(tag: str, message: str) -> None:
    global _WARNINGS
    with _lock:
        _WARNINGS += 1
    _emit(tag, message, "yellow")


def fail(tag: str, message: str) -> None:
    _emit(tag, message, "red")


def debug(tag: str, message: str) -> None:
    # only with --verbose
    if _VERBOSE:
        _emit(tag, message, "white")


def warning_count() -> int:
    return _WARNINGS


def reset_warnings() -> None:
    global _WARNINGS
    with _lock:
        _WARNINGS = 0
