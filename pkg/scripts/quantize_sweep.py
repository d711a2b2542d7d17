"""LLEC quantization of one image over a grid of thresholds.

The embedding is computed once and reused; each threshold pair eps1 = eps2 = eps
gives a number of colors S and a distortion D.  Without an input image, a
synthetic flat-region test image is used.

    python scripts/quantize_sweep.py [image.ppm] --eps 0.6 0.4 0.2 --outdir sweep/
"""

import argparse
from pathlib import Path

from llec.imaging import cloud_to_image, image_to_cloud, quality_report, read_image, write_image
from llec.segmentation import LLECConfig, llec_cluster, reconstruct
from llec.synthetic import flat_regions_image


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("image", nargs="?")
    ap.add_argument("--eps", type=float, nargs="+", default=[0.6, 0.4, 0.2, 0.1])
    ap.add_argument("-k", type=int, default=4)
    ap.add_argument("-d", type=int, default=2)
    ap.add_argument("--outdir", type=Path)
    args = ap.parse_args()

    img = read_image(args.image) if args.image else flat_regions_image(64)[0]
    X, layout = image_to_cloud(img)
    if args.outdir:
        args.outdir.mkdir(parents=True, exist_ok=True)
    emb = None
    print("eps      S  distortion")
    for eps in args.eps:
        config = LLECConfig(k=args.k, d=args.d, eps1=eps, eps2=eps)
        clustering, emb = llec_cluster(X, config, embedding=emb)
        out = cloud_to_image(reconstruct(X, clustering), layout)
        rep = quality_report(img, out, clustering.S)
        print(f"{eps:<6g} {clustering.S:>3}  {rep.distortion:.6e}")
        if args.outdir:
            write_image(args.outdir / f"llec_eps{eps:g}.png", out)


if __name__ == "__main__":
    main()
