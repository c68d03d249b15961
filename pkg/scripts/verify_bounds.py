"""Monte Carlo checks of the small-m and large-m concentration bounds."""
import argparse

from bestwindow.theory import verify_deficient_bound, verify_sufficient_bound


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()

    rep = verify_deficient_bound(d=2048, n_label=100, m=5, trials=args.trials, threads=args.threads)
    print(f"small m: {rep.passes}/{rep.trials} trials within {rep.bound:.5f} "
          f"(mean deviation {rep.lhs:.4f})")

    prev = None
    for m in (2048, 4096, 8192, 16384, 32768):
        rep = verify_sufficient_bound(16, m, trials=args.trials, threads=args.threads)
        shrink = f"  shrink x{prev / rep.lhs:.3f}" if prev else ""
        print(f"large m={m:6d}: mean deviation {rep.lhs:.4f}  ratio to d^2 ln d/m "
              f"{rep.ratio:.4g}{shrink}")
        prev = rep.lhs


if __name__ == "__main__":
    main()
