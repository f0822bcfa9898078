from __future__ import annotations

import logging
import colorlog

from . import env

getLogger = colorlog.getLogger
DEBUG = colorlog.DEBUG
INFO = colorlog.INFO
WARNING = colorlog.WARNING
ERROR = colorlog.ERROR
CRITICAL = colorlog.CRITICAL

logger_level_muted = colorlog.INFO if env.DEBUG else colorlog.WARNING
logger_level_shut_upped = colorlog.ERROR if env.DEBUG else colorlog.CRITICAL

getLogger('asyncio').setLevel(logger_level_muted)
getLogger('shapely').setLevel(logger_level_muted)
getLogger('shapely.geos').setLevel(logger_level_shut_upped)
getLogger('hypothesis').setLevel(logger_level_muted)


class RepeatedMessageFilter(logging.Filter):
    """
    Drop a record once the same logger has emitted its message ``max_repeats`` times.

    The descent loop and the sampled checkers repeat their warnings on every rejected trial. Records at ERROR
    and above always pass.
    """

    def __init__(self, max_repeats: int = 3):
        super().__init__()
        self.max_repeats = max_repeats
        self.seen: dict[tuple[str, str], int] = {}

    def filter(self, record: logging.LogRecord) -> bool:
        if record.levelno >= logging.ERROR:
            return True
        key = (record.name, record.getMessage())
        count = self.seen.get(key, 0) + 1
        self.seen[key] = count
        return count <= self.max_repeats


repeated_message_filter = RepeatedMessageFilter()
getLogger('plinv.minimize').addFilter(repeated_message_filter)
getLogger('plinv.checker').addFilter(repeated_message_filter)
