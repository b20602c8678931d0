"""Sample-size search at the reference planning configuration.

Five raters, five evenly used categories, power 0.8, CI half-width 0.1.
Prints the JSON result, including the search trace and echoed assumptions.

    python scripts/power_reference_config.py --replicates 2000 --seed 1
"""

import argparse
import json

from ratingstats.power import PowerSpec, required_sample_size


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--replicates", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--assumed-coefficient", type=float, default=0.7)
    parser.add_argument("--kind", default="icc-3-k", choices=("icc-3-k", "krippendorff-ordinal"))
    args = parser.parse_args()
    spec = PowerSpec(
        raters=5,
        categories=5,
        power=0.8,
        precision=0.1,
        assumed_coefficient=args.assumed_coefficient,
        coefficient_kind=args.kind,
        replicates=args.replicates,
        seed=args.seed,
    )
    result = required_sample_size(spec)
    print(json.dumps(result.to_dict(), indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
