"""Write MovieLens-100k ``u.data`` to data/u.data.

Uses a local ml-100k.zip if given, otherwise pulls the copy bundled in the
RecBole wheel from PyPI (its ml-100k.inter file holds the same 100k rows).
"""

import argparse
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

DEST = Path(__file__).resolve().parents[1] / "data" / "u.data"
INTER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def from_grouplens_zip(path: Path) -> str:
    with zipfile.ZipFile(path) as z:
        return z.read("ml-100k/u.data").decode("ascii")


def from_recbole() -> str:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                        "recbole==1.2.1", "-d", tmp], check=True)
        wheel = next(Path(tmp).glob("recbole-*.whl"))
        with zipfile.ZipFile(wheel) as z:
            lines = io.TextIOWrapper(z.open(INTER), encoding="ascii").read().splitlines()
    # drop the typed header row
    return "".join(line + "\n" for line in lines[1:])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--zip", type=Path, help="GroupLens ml-100k.zip to extract from")
    ap.add_argument("--dest", type=Path, default=DEST)
    args = ap.parse_args()
    text = from_grouplens_zip(args.zip) if args.zip else from_recbole()
    n = text.count("\n")
    if n != 100000:
        sys.exit(f"expected 100000 ratings, got {n}")
    args.dest.parent.mkdir(parents=True, exist_ok=True)
    args.dest.write_text(text)
    print(f"wrote {n} ratings to {args.dest}")


if __name__ == "__main__":
    main()
