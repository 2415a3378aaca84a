import logging
import time

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


def setup_logging(verbose: int = 0) -> logging.Logger:
    """Configure the root logger once; -v for INFO, -vv for DEBUG."""
    level = logging.WARNING
    if verbose == 1:
        level = logging.INFO
    elif verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format=LOG_FORMAT)
    logging.getLogger().setLevel(level)
    return logging.getLogger("cloner")


class Telemetry:
    def __init__(self, command: str):
        """
        Collect the summary values of one command run.

        :param command: subcommand name, used as the log table name
        """
        self._command = command
        self._logger = logging.getLogger(f"telemetry.{command}")
        self._start = time.perf_counter()
        self._values: dict[str, object] = {}

    def put(self, key: str, value) -> None:
        self._values[key] = value
        self._logger.debug("%s/%s = %r", self._command, key, value)

    def count(self, key: str, increment: int = 1) -> None:
        self._values[key] = int(self._values.get(key, 0)) + increment

    def summary(self) -> dict[str, object]:
        out = dict(self._values)
        out["command"] = self._command
        out["elapsed_s"] = round(time.perf_counter() - self._start, 6)
        return out

    def telemeterize(self) -> dict[str, object]:
        """Write the collected values as one log block and return them."""
        summary = self.summary()
        self._logger.info("=" * 60)
        for key, value in summary.items():
            self._logger.info("%-24s %s", key, value)
        self._logger.info("=" * 60)
        return summary
