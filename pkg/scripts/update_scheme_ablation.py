"""Online update scheme comparison on the frozen drift district.

Runs the stochastic controller once per scheme and reports the average
score and the wall time spent in online updates.
"""

import argparse
from dataclasses import replace

from vppdispatch.benchmark import _pretrain
from vppdispatch.controller import Split, run_no_storage, run_sofo
from vppdispatch.evaluate import normalize
from vppdispatch.forecast import UpdateScheme
from vppdispatch.presets import (
    DRIFT_CONTROLLER,
    DRIFT_PERTURBATION,
    DRIFT_SPEC,
    DRIFT_TRAIN_DAYS,
    DRIFT_VAL_DAYS,
    FREEZE_FINETUNE,
    drift_benchmark_config,
)
from vppdispatch.synthetic import generate_synthetic

SCHEMES = ("noft", "selfadapt", "scratch", "smalllr", "freeze")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    instance = generate_synthetic(DRIFT_SPEC)
    split = Split(DRIFT_TRAIN_DAYS * 24, (DRIFT_TRAIN_DAYS + DRIFT_VAL_DAYS) * 24)
    config = replace(DRIFT_CONTROLLER, seed=args.seed)
    bundle = _pretrain(instance, split, drift_benchmark_config("/tmp/unused"), args.seed)
    base = run_no_storage(instance, split, config).costs

    print(f"{'scheme':10s} {'average':>8s} {'update_s':>9s} {'events':>7s}")
    for scheme in SCHEMES:
        cfg = replace(config, scheme=UpdateScheme(scheme))
        if scheme == "freeze":
            cfg = replace(cfg, finetune=FREEZE_FINETUNE)
        ep = run_sofo(
            instance, split, cfg,
            perturb=DRIFT_PERTURBATION, pretrained=bundle.copy(),
        )
        score = normalize(ep.costs, base).average
        print(
            f"{scheme:10s} {score:8.4f} {sum(ep.fine_tune_seconds):9.2f} {len(ep.fine_tune_steps):7d}"
        )


if __name__ == "__main__":
    main()
