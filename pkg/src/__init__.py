from __future__ import annotations

from . import env  # logging and .env are set up in env, so import it first

import sys
from signal import signal, SIGTERM

from . import log, aio_helper, command

logger = log.getLogger('plinv')


def main():
    signal(SIGTERM, lambda *_, **__: sys.exit(1))  # graceful exit handler
    logger.debug(f'plinv {env.VERSION} started, {aio_helper.THREAD_COUNT} worker threads')
    try:
        status = command.run(sys.argv[1:])
    except KeyboardInterrupt:
        logger.error('Interrupted')
        status = 130
    finally:
        aio_helper.shutdown()
    sys.exit(status)
