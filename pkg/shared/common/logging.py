"""
EALogger integration wrapper for CoMPlan
Provides EALogger integration with a standard logging fallback
"""
import logging
import sys
from typing import Optional
from contextvars import ContextVar

# Try to import EALogger
try:
    from EALogger.logging_setup import get_logger as ea_get_logger
    from EALogger.decorators import log_entry_exit as ea_log_entry_exit
    EALOGGER_AVAILABLE = True
except ImportError:
    EALOGGER_AVAILABLE = False
    ea_get_logger = None
    ea_log_entry_exit = None

# Context variables for run tracking
run_id_var: ContextVar[Optional[str]] = ContextVar('run_id', default=None)
command_var: ContextVar[Optional[str]] = ContextVar('command', default=None)
service_name_var: ContextVar[Optional[str]] = ContextVar('service_name', default=None)

_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - [%(command)s %(run_id)s] %(message)s'


class _StderrHandler(logging.StreamHandler):
    """StreamHandler that always writes to the current sys.stderr"""

    @property
    def stream(self):
        return sys.stderr

    @stream.setter
    def stream(self, value):
        pass


class RunContextFilter(logging.Filter):
    """Injects the run context into every record"""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = run_id_var.get() or "-"
        record.command = command_var.get() or "-"
        return True


def configure_root(level: str = "INFO") -> None:
    """
    Route all library loggers to stderr

    stdout is reserved for CSV and report output.
    """
    root = logging.getLogger()
    if not any(getattr(h, "_complan", False) for h in root.handlers):
        handler = _StderrHandler()
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler.addFilter(RunContextFilter())
        handler._complan = True  # type: ignore[attr-defined]
        root.addHandler(handler)
    root.setLevel(level.upper())


def get_logger(module_name: str, app_name: str):
    """
    Get logger using EALogger if available, otherwise fallback to standard logging

    Args:
        module_name: Name of the module (usually __name__)
        app_name: Name of the application (e.g., 'planner-service')

    Returns:
        Logger instance
    """
    if EALOGGER_AVAILABLE:
        return ea_get_logger(module_name, app_name=app_name)
    else:
        logger = logging.getLogger(module_name)
        if not logging.getLogger().handlers:
            configure_root()
        return logger


def log_entry_exit(app_name: str):
    """
    Decorator for logging function entry/exit

    Args:
        app_name: Name of the application

    Returns:
        Decorator function
    """
    if EALOGGER_AVAILABLE:
        return ea_log_entry_exit(app_name=app_name)
    else:
        def decorator(func):
            import functools

            @functools.wraps(func)
            def wrapper(*args, **kwargs):
                logger = logging.getLogger(func.__module__)
                logger.debug(f"Entering {func.__qualname__}")
                try:
                    return func(*args, **kwargs)
                finally:
                    logger.debug(f"Exiting {func.__qualname__}")
            return wrapper
        return decorator


def set_run_context(run_id: Optional[str] = None, command: Optional[str] = None):
    """Set run context for logging"""
    if run_id:
        run_id_var.set(run_id)
    if command:
        command_var.set(command)


def clear_run_context():
    """Clear run context"""
    run_id_var.set(None)
    command_var.set(None)


def setup_logger(service_name: str, level: str = "INFO"):
    """Configure stderr logging for a service and return its logger"""
    configure_root(level)
    service_name_var.set(service_name)
    return get_logger(service_name, app_name=service_name)
