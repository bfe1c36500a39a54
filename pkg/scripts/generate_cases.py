"""Write the versioned case-study bundles under cases/.

    python scripts/generate_cases.py [--root cases] [--seed 0] [names...]
"""

import argparse

from pabo.cases import CASES, generate_case_bundle, write_bundle


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("names", nargs="*", default=list(CASES))
    ap.add_argument("--root", default="cases")
    ap.add_argument("--seed", type=int, default=0, help="surrogate error seed")
    args = ap.parse_args()
    for name in args.names:
        out = write_bundle(generate_case_bundle(name, args.seed), args.root)
        print(out)


if __name__ == "__main__":
    main()
