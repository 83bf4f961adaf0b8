#!/usr/bin/env python3
"""Generate a seeded synthetic fixture (manifest + embeddings) for pipeline runs.

Examples:
    # 768-dim CLS-style vectors, ready for `snakeid train`
    python3 scripts/make_fixture.py --out-dir work --kind vectors

    # small patch grids, ready for `snakeid compress` (block 4, grids 12x16)
    python3 scripts/make_fixture.py --out-dir work --kind grids
"""

import argparse
from pathlib import Path

from snakeid import synthetic
from snakeid.embedstore import save_grids, save_vectors


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--kind", choices=("vectors", "grids"), default="vectors")
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--dim", type=int, default=768, help="vector fixtures only")
    parser.add_argument("--train-observations", type=int, default=500)
    parser.add_argument("--test-observations", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    if args.kind == "vectors":
        manifest, store = synthetic.blob_fixture(
            n_classes=args.classes,
            dim=args.dim,
            train_observations=args.train_observations,
            test_observations=args.test_observations,
            seed=args.seed,
        )
        save_vectors(store, out / "features.seb1")
        print(f"wrote {out / 'features.seb1'} ({len(store)} vectors, dim {store.dim})")
    else:
        manifest, gstore, _ = synthetic.grid_fixture(
            n_classes=args.classes,
            train_observations=args.train_observations,
            test_observations=args.test_observations,
            seed=args.seed,
        )
        save_grids(gstore, out / "grids.spg1")
        print(f"wrote {out / 'grids.spg1'} ({len(gstore)} grids, {gstore.rows}x{gstore.cols})")

    (out / "manifest.csv").write_text(manifest.to_csv())
    print(f"wrote {out / 'manifest.csv'} ({len(manifest)} rows)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
