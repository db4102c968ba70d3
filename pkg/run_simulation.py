"""
run_simulation.py: Batch driver. Runs every experiment file in GELS_CONFIG_DIR into
GELS_RESULTS_DIR/<name>.csv, then checks GELS over the two-hypothesis counterexample base.
"""

import logging
import os
import sys

import numpy as np

from simulation.config import load_sweep_config
from simulation.runner import counterexample_experiment, run_sweep
from storage.results_writer import save_simulation, simulation_frame
from utils.errors import GelsError
from utils.log import configure_logging
from utils.settings import get_settings

logger = logging.getLogger("run_simulation")

COUNTEREXAMPLE_ALPHA = 0.05
COUNTEREXAMPLE_REPLICATIONS = 1_000_000
COUNTEREXAMPLE_SEED = 20100


def main() -> int:
    settings = get_settings()
    configure_logging("INFO")

    if not os.path.isdir(settings.config_dir):
        logger.error("❌ Config directory not found: %s", settings.config_dir)
        return 1

    failures = 0
    for file in sorted(os.listdir(settings.config_dir)):
        if not file.endswith(".json"):
            continue
        path = os.path.join(settings.config_dir, file)
        try:
            config = load_sweep_config(path)
            results = run_sweep(config, workers=settings.workers, chunk_size=settings.chunk_size)
        except GelsError as exc:
            logger.error("❌ Error running %s: %s", file, exc)
            failures += 1
            continue
        save_simulation(simulation_frame(results, config.name), settings.results_dir, config.name)

    rng = np.random.default_rng(COUNTEREXAMPLE_SEED)
    result = counterexample_experiment(COUNTEREXAMPLE_ALPHA, COUNTEREXAMPLE_REPLICATIONS, rng)
    marker = "⚠️" if result.simulated_fdr > COUNTEREXAMPLE_ALPHA else "✅"
    logger.info(
        "%s Counterexample FDR at alpha=%g: simulated %.6f (se %.6f), exact %.6f",
        marker, COUNTEREXAMPLE_ALPHA, result.simulated_fdr, result.stderr, result.analytic_fdr,
    )
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
