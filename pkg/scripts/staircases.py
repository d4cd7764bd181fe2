"""Write entropy and dimension staircases as CSV files.

    python scripts/staircases.py --out staircases/ --grid 200
"""
import argparse
from pathlib import Path

from univoque import cli


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("staircases"))
    parser.add_argument("--grid", type=int, default=200)
    parser.add_argument("--max-word-len", type=int, default=8)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    runs = {
        "H.csv": ["--which", "H", "--t1", "1.7", "--t2", "2"],
        "f.csv": ["--which", "f", "--t1", "1.78", "--t2", "2"],
        "HJ_18.csv": ["--which", "HJ:18", "--t1", "1.93357", "--t2", "1.93361"],
    }
    for name, extra in runs.items():
        target = args.out / name
        with target.open("w") as handle:
            code = cli.main(["staircase", "--format", "csv", "--grid", str(args.grid),
                             "--max-word-len", str(args.max_word_len), *extra], out=handle)
        print(f"{target}: exit {code}")


if __name__ == "__main__":
    main()
