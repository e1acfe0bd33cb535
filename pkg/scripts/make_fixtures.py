"""Regenerate the seed-pinned instances shipped in src/ppszkit/fixtures."""
import os
import sys

from ppszkit.generator import Family, GenSpec, generate, write_instance

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "ppszkit", "fixtures")

# (family, n, m, seed)
SPECS = [
    ("planted", 4, 6, 101), ("planted", 5, 10, 102), ("planted", 5, 18, 103),
    ("planted", 6, 12, 104), ("planted", 6, 24, 105), ("planted", 7, 14, 106),
    ("planted", 7, 28, 107), ("unique", 5, 20, 108), ("unique", 6, 26, 109),
    ("unique", 7, 30, 110), ("planted", 3, 2, 111), ("planted", 4, 12, 112),
]


def main() -> int:
    os.makedirs(OUT, exist_ok=True)
    for family, n, m, seed in SPECS:
        spec = GenSpec(n, m, 3, Family(family), seed)
        f, model = generate(spec)
        write_instance(os.path.join(OUT, f"{family}_n{n}_m{m}_s{seed}"), spec, f, model)
    return 0


if __name__ == "__main__":
    sys.exit(main())
