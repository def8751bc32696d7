import logging
import os
from datetime import datetime

from config import Config

# threadName is the batch command prefix for pool workers, MainThread otherwise
LOG_FORMAT = '%(asctime)s %(levelname)-7s [%(threadName)s] %(name)s: %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


class Logger:
    """
    Logging utility for the enhancement toolkit
    """

    @staticmethod
    def setup(name='speech_enhancement', command=None, log_file=None, level=logging.INFO):
        """
        Attach a stderr handler and a per-command dated log file to a logger

        Args:
            name: Logger name (None for the root logger)
            command: simulate / enhance / evaluate / sweep; names the log file
            log_file: Optional log file path (defaults to LOG_DIR/<command>_YYYYMMDD.log)
            level: Logging level

        Returns:
            Logger instance
        """
        logger = logging.getLogger(name)
        logger.setLevel(level)

        # One set of handlers per logger
        if logger.handlers:
            return logger

        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        stderr_handler = logging.StreamHandler()
        stderr_handler.setFormatter(formatter)
        logger.addHandler(stderr_handler)

        if log_file is None:
            os.makedirs(Config.LOG_DIR, exist_ok=True)
            stem = command or 'enhancement'
            log_file = os.path.join(Config.LOG_DIR, f"{stem}_{datetime.now().strftime('%Y%m%d')}.log")

        run_log_handler = logging.FileHandler(log_file)
        run_log_handler.setFormatter(formatter)
        logger.addHandler(run_log_handler)

        return logger

    @staticmethod
    def log_scene(logger, scene, measured_snr=None, measured_sir=None):
        """Log a simulated scene"""
        logger.info(
            f"Simulated {scene.utterance_id}: room {'x'.join(f'{d:.2f}' for d in scene.room_dims)} m, "
            f"T60 {scene.t60:.2f}s, angle {scene.angle_difference:.1f} deg"
        )
        if measured_snr is not None:
            sir = 'n/a' if measured_sir is None else f"{measured_sir:.2f}"
            logger.info(f"  SNR {measured_snr:.2f} dB (drawn {scene.snr_db}), SIR {sir} dB (drawn {scene.sir_db})")

    @staticmethod
    def log_enhancement(logger, utterance_id, cfg, degenerate_bins=0):
        """Log one enhanced utterance"""
        logger.info(
            f"Enhanced {utterance_id} with {cfg.architecture.value} ({cfg.dervb_kind.value}), "
            f"taps={cfg.stage_taps}, eps={cfg.stage_eps}"
        )
        if degenerate_bins:
            logger.warning(f"  {degenerate_bins} degenerate bin(s) fell back to passthrough")

    @staticmethod
    def log_metrics(logger, metrics):
        """Log per-utterance metrics"""
        logger.info(
            f"Scored {metrics.utterance_id}: SISNR {metrics.sisnr:.2f} dB, "
            f"STOI {metrics.stoi * 100:.1f}, SRMR {metrics.srmr:.2f}, MSE {metrics.spectral_mse:.3e}"
        )
