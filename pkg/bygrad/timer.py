"""
Context-based Timer
"""
import logging
import time

logger = logging.getLogger(__name__)


class Timer:
    """
    Context-based Timer class that logs the duration of the context
    as well as the frequency.
    """
    def __init__(self, name, enabled=True, count=1):
        """
        :param name: label used in the log line
        :type name: str
        :param enabled: log on exit, defaults to True
        :type enabled: bool, optional
        :param count: number of repetitions inside the context, used for the rate
        :type count: int, optional
        """
        self.name = name
        self.enabled = enabled
        self.count = count
        self.start = 0.0
        self.elapsed = 0.0

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *args):
        self.elapsed = time.perf_counter() - self.start
        if self.enabled:
            rate = self.count / self.elapsed if self.elapsed > 0 else float('inf')
            logger.debug('%s: %.4fs (%.1f hz)', self.name, self.elapsed, rate)
