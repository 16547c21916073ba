"""Write the seeded two-class synthetic tree dataset as JSON."""

import argparse

from tedlearn.datasets import synthetic_dataset


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-per-class", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-size", type=int, default=6)
    p.add_argument("--out", default="data/synthetic.json")
    args = p.parse_args()
    d = synthetic_dataset(args.n_per_class, args.seed, max_size=args.max_size)
    d.save(args.out)
    print(f"wrote {len(d)} trees to {args.out}")


if __name__ == "__main__":
    main()
