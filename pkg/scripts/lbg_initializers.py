"""Compare LBG initializers by final distortion over many seeds.

Runs every initializer on one image (a noisy two-tone image by default) and
prints median and spread of the final distortion.  The LLEC palette is
computed once from the image with the given thresholds.

    python scripts/lbg_initializers.py --seeds 20 --n-centers 4
"""

import argparse

import numpy as np

from llec.imaging import image_to_cloud, read_image
from llec.segmentation import LLECConfig, llec_cluster
from llec.vq import Initializer, init_centers, lbg


def two_tone(size=32, seed=0):
    rng = np.random.default_rng(seed)
    img = np.zeros((size, size, 3), np.uint8)
    img[:, : size // 2] = (40, 60, 200)
    img[:, size // 2:] = (230, 210, 40)
    return np.clip(img.astype(int) + rng.integers(-5, 6, img.shape), 0, 255).astype(np.uint8)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("image", nargs="?")
    ap.add_argument("--seeds", type=int, default=20)
    ap.add_argument("--n-centers", type=int, default=4)
    ap.add_argument("--eps", type=float, default=0.4)
    args = ap.parse_args()

    img = read_image(args.image) if args.image else two_tone()
    X, _ = image_to_cloud(img)
    clustering, _ = llec_cluster(X, LLECConfig(eps1=args.eps, eps2=args.eps))

    runs = {
        "random-rgb": [Initializer("random-rgb", n=args.n_centers, seed=s) for s in range(args.seeds)],
        "random-from-data": [Initializer("random-from-data", n=args.n_centers, seed=s)
                             for s in range(args.seeds)],
        "hand-identified": [Initializer("hand-identified")],
        "llec-palette": [Initializer("llec-palette", palette=clustering.prototypes)],
    }
    print(f"{'initializer':<18} {'centers':>7} {'median D':>12} {'min D':>12} {'max D':>12}")
    for name, inits in runs.items():
        results = [lbg(X, init_centers(X, init)) for init in inits]
        D = np.array([r.distortion for r in results])
        n = results[0].codebook.n
        print(f"{name:<18} {n:>7} {np.median(D):>12.4e} {D.min():>12.4e} {D.max():>12.4e}")


if __name__ == "__main__":
    main()
