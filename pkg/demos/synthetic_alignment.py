"""Compare mined rectangles with the generating ones on a synthetic layout.

    python demos/synthetic_alignment.py [layout] [support] [seed]

Defaults: ``simple 500 0``. Also shows the effect of pruning only once at
the end instead of after every merge wave.
"""

import sys

from hypermint import MinerConfig, discretize, equal_width_grid, evaluate, generate, mine


def report(title, d, truth, result):
    ev = evaluate(result.patterns, d, result.total_bits, result.baseline, truth=truth.boxes())
    print(f"{title}: {ev.n_patterns} rectangles, ratio {ev.compression_ratio:.3f}, "
          f"Jcd(T,H) {ev.jcd_t_h:.3f}, Jcd(H,T) {ev.jcd_h_t:.3f}, redundancy {ev.pairwise_cover_jaccard or 0:.3f}")
    for box in sorted(tuple(round(v, 1) for v in b.ravel()) for b in
                      (d.grid.bounds(h.lower, h.upper) for h in result.patterns)):
        x0, x1, y0, y1 = box
        print(f"    x {x0:5.1f}..{x1:5.1f}   y {y0:5.1f}..{y1:5.1f}")


def main(argv):
    layout = argv[0] if argv else "simple"
    support = int(argv[1]) if len(argv) > 1 else 500
    seed = int(argv[2]) if len(argv) > 2 else 0

    data, truth = generate(layout, support, seed)
    d = discretize(data, equal_width_grid(data))
    print(f"{layout}, {support} points per rectangle, {d.grid.bins[0]} intervals per axis")
    print("ground truth:")
    for x0, y0, x1, y1 in truth.rectangles:
        print(f"    x {x0:5.1f}..{x1:5.1f}   y {y0:5.1f}..{y1:5.1f}")

    report("pruning after every wave", d, truth, mine(d))
    report("pruning at the end", d, truth, mine(d, MinerConfig(prune_at_end=True)))


if __name__ == "__main__":
    main(sys.argv[1:])
