"""Embed the translated-block torus data in 3D and measure neighborhood preservation.

For every frame, count how many of its 4 toroidally adjacent frames are among
its 8 nearest neighbors in the embedding.  Prints one line per seed.

    python scripts/torus_experiment.py --seeds 10 --save-embedding torus_emb.csv
"""

import argparse
import time

import numpy as np
from scipy.spatial import cKDTree

from llec.lle import run_lle, save_embedding
from llec.synthetic import TorusSpec, torus_adjacent, torus_dataset


def preservation(Y, adj, n_neighbors=8, need=2):
    _, nn = cKDTree(Y.T).query(Y.T, n_neighbors + 1)
    hits = np.array([len(set(nn[i, 1:]) & set(adj[i])) for i in range(Y.shape[1])])
    return float(np.mean(hits >= need))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--bg-size", type=int, default=20)
    ap.add_argument("--block-size", type=int, default=10)
    ap.add_argument("-k", type=int, default=4)
    ap.add_argument("-d", type=int, default=3)
    ap.add_argument("--closed-cycle", action="store_true")
    ap.add_argument("--save-embedding", help="write the seed-0 embedding here")
    args = ap.parse_args()

    scores = []
    for seed in range(args.seeds):
        spec = TorusSpec(args.bg_size, args.block_size, seed)
        start = time.perf_counter()
        emb = run_lle(torus_dataset(spec), k=args.k, d=args.d, closed_cycle=args.closed_cycle)
        score = preservation(emb.Y, torus_adjacent(spec))
        scores.append(score)
        vals = " ".join(f"{v:.2e}" for v in emb.eigenvalues)
        print(f"seed {seed}: preservation {score:.4f}  eigenvalues {vals}"
              f"  {time.perf_counter() - start:.2f} s")
        if seed == 0 and args.save_embedding:
            save_embedding(args.save_embedding, emb)
    print(f"seeds with preservation >= 0.8: {sum(s >= 0.8 for s in scores)}/{len(scores)}")


if __name__ == "__main__":
    main()
