"""Selection-strategy by trigger-policy ablation grid on the reference
biased stream.

Runs all nine {majority, random, knee} x {hp, every, previous} cells over the
same seeds and stream, writes the grid CSV, and prints it as a table. Every
cell reuses the standalone single-run helper, so any number here can be
reproduced in isolation with the same seed.
"""

import argparse
from pathlib import Path

from emosam.cli import parse_seeds
from emosam.engine import EngineConfig
from emosam.experiments import ABLATION_HEADER, apply_desk_preset, compare_ablations
from emosam.stream import BiasStreamConfig, GroupRates, generate_bias_stream


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("results/ablation.csv"))
    parser.add_argument("--seeds", type=parse_seeds, default=tuple(range(5)),
                        help="comma list or start:stop range (default 0:5)")
    parser.add_argument("--instances", type=int, default=10_000)
    args = parser.parse_args()

    third = args.instances // 3
    stream = BiasStreamConfig(
        n_instances=args.instances,
        d_informative=5,
        d_noise=2,
        proxy_strength=0.8,
        base_rates=GroupRates(0.65, 0.35),
        drift_points=(third, 2 * third),
        seed=11,
        window_size=250,
    )
    engine, _ = apply_desk_preset(EngineConfig())
    chunks = generate_bias_stream(stream)

    rows = compare_ablations(chunks, engine, args.seeds, output_path=args.out)

    print(f"wrote {args.out} ({len(args.seeds)} seeds per cell)")
    print("".join(f"{name:>26s}" for name in ABLATION_HEADER))
    for row in rows:
        print("".join(
            f"{row[name]:>26.4f}" if isinstance(row[name], float) else f"{row[name]!s:>26s}"
            for name in ABLATION_HEADER
        ))


if __name__ == "__main__":
    main()
