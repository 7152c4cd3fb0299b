"""Walk through a mining run on a twelve-point toy dataset.

Prints the elementary cells, every accepted merge with its gain, and the
final rectangles with their description length.

    python demos/running_example.py
"""

import numpy as np

from hypermint import Dataset, MinerConfig, discretize, elementary_cells, grid_from_cuts, mine

POINTS = [
    (0.30, 0.15), (0.05, 3.90), (0.20, 4.35), (4.40, 0.00), (4.30, 3.70), (4.10, 3.90),
    (4.25, 6.60), (7.10, 4.15), (6.70, 6.50), (6.90, 7.40), (7.45, 6.75), (7.10, 7.35),
]


def main():
    data = Dataset.from_array(POINTS, attributes=("x", "y"))
    # unit intervals centred on the integers 0..7
    d = discretize(data, grid_from_cuts([np.arange(9) - 0.5] * 2))

    print("elementary cells (id: cell, objects)")
    for i, cell in enumerate(elementary_cells(d)):
        print(f"  {i}: {cell.coords}  {cell.cover.tolist()}")

    result = mine(d, MinerConfig(k_neighbors=1))
    print(f"\nstart: {result.baseline.total_bits:.2f} bits")
    for step in result.trace:
        parts = " + ".join(str(p) for p in step.parts)
        print(f"  {step.kind:5s} {parts:>9s} -> {step.new_id:2d}  gain {step.gain:6.2f}  "
              f"now {step.total_bits:.2f} bits, {step.n_patterns} patterns")

    print("\nfinal rectangles")
    for h in result.patterns:
        print(f"  {h.lower}..{h.upper}  objects {h.cover.tolist()}")
    length = result.total_bits
    print(f"\nmodel {length.model_bits:.2f} + header {length.header_bits:.2f} + data {length.data_bits:.2f}"
          f" + residual {length.residual_bits:.2f} = {length.total_bits:.2f} bits"
          f" (ratio {result.compression_ratio:.3f})")


if __name__ == "__main__":
    main()
