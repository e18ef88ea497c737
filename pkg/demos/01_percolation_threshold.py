"""Percolation thresholds from degree histograms.

A hardware graph stays useful under random qubit loss as long as the
occupied fraction exceeds the percolation threshold of its degree
distribution. This demo computes the threshold for a hand-written
mixed-degree histogram, for an ideal Chimera grid, and for the bundled
topology with its disabled qubits masked out.
"""

from collections import Counter

from anneal_forge.chimera import build_chimera, bundled_defect_topology
from anneal_forge.graphs import DegreeHistogram, percolation_threshold


def hardware_histogram(hw):
    counts = Counter(hw.degree(q) for q in hw.usable_qubits)
    return DegreeHistogram(dict(sorted(counts.items())), len(hw.usable_qubits))


def show(name, hist):
    p_c = percolation_threshold(hist)
    degrees = ", ".join(f"{d}:{c}" for d, c in sorted(hist.counts.items()))
    print(f"{name:26s} n={hist.n_vertices:5d}  degrees {{{degrees}}}")
    print(f"{'':26s} p_c = {p_c:.6f}")


def main():
    show("mixed histogram", DegreeHistogram({11: 8, 12: 8, 13: 2}, 18))
    show("ideal 12x12 Chimera", hardware_histogram(build_chimera(12, 12, 4)))
    show("bundled defect topology", hardware_histogram(bundled_defect_topology()))
    print()
    print("A lower threshold tolerates more random qubit loss before"
          " long-range connectivity disappears.")


if __name__ == "__main__":
    main()
