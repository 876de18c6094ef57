import logging

from jax import debug

from gradvar.utils import TimingData

logger = logging.getLogger(__name__)


def setup_logger(verbose: bool = False, debug: bool = False):
    """Configures logging for the entire application."""
    root = logging.getLogger()

    if root.hasHandlers():
        root.handlers.clear()

    if debug:
        logging_level = logging.DEBUG
        logging.getLogger("jax").setLevel(logging.INFO)
        logging.getLogger("jaxlib").setLevel(logging.INFO)
        logging.getLogger("xla").setLevel(logging.INFO)
    elif verbose:
        logging_level = logging.INFO
    else:
        logging_level = logging.WARNING
    root.setLevel(logging_level)

    handler = logging.StreamHandler()
    handler.setLevel(logging_level)
    root.addHandler(handler)


def jax_debug_log(
    fmt: str, *args, logger: logging.Logger = None, level: int = logging.DEBUG, **kwargs
):
    """Logs a message from traced code through jax.debug.callback."""
    if logger is None:
        logger = logging.getLogger()

    debug.callback(
        lambda *a, **k: logger.log(level, fmt.format(*a, **k)),
        *args,
        ordered=False,
        **kwargs,
    )


def flow_final_log(trajectory, timing: TimingData):
    """
    Logs the outcome of one gradient-flow integration.

    Parameters
    ----------
    trajectory : Trajectory
        The integrated trajectory.
    timing : TimingData
        Timing information.
    """
    if logging.root.level > logging.INFO:
        return
    t_end = trajectory.ts[-1]
    x_end, y_end = trajectory.zs[-1]
    logger.info(
        "Flow (%s) stopped: %s after %d accepted / %d rejected steps.",
        trajectory.direction.name.lower(),
        trajectory.reason.name,
        trajectory.n_accepted,
        trajectory.n_rejected,
    )
    logger.info("  t_end=%.10g, end point=(%.10g, %.10g)", t_end, x_end, y_end)
    for name, seconds in timing.items():
        logger.info("  %s: %.3f sec", name, seconds)


def certificate_log(certificates, timing: TimingData):
    """Logs one line per analyzed invariant line, then the timings."""
    if logging.root.level > logging.INFO:
        return
    for certificate in certificates:
        logger.info(
            "Line %s: %s (%s)", certificate.line, certificate.verdict.name, certificate.reason
        )
    for name, seconds in timing.items():
        logger.info("  %s: %.3f sec", name, seconds)


def experiment_final_log(report, timing: TimingData):
    """Logs the summary of a finiteness experiment."""
    if logging.root.level > logging.INFO:
        return
    logger.info(
        "Finiteness experiment: %d trajectories x %d cuts, b0=%s, agreement=%.4f, stable=%s",
        report.n_traj,
        report.n_cuts,
        report.b0,
        report.agreement,
        report.stable,
    )
    if report.failures:
        logger.info("  %d trajectory failure(s) recorded", len(report.failures))
    for name, seconds in timing.items():
        logger.info("  %s: %.3f sec", name, seconds)
