"""Regenerate the shipped color-name lookup table.

The table assigns each 5-bit-quantized RGB bin a probability distribution
over 11 color terms, built from Gaussian affinities to hand-picked
prototype colors. Rows sum to 1 and every saturated primary lands on the
obviously matching name.

Usage: python3 scripts/gen_cn_table.py [out_path]
"""

import os
import sys

import numpy as np

NAMES = [
    "black", "blue", "brown", "gray", "green", "orange",
    "pink", "purple", "red", "white", "yellow",
]

PROTOTYPES = np.array(
    [
        [0, 0, 0],        # black
        [0, 0, 255],      # blue
        [139, 69, 19],    # brown
        [128, 128, 128],  # gray
        [0, 160, 0],      # green
        [255, 150, 0],    # orange
        [255, 170, 190],  # pink
        [140, 0, 160],    # purple
        [255, 0, 0],      # red
        [255, 255, 255],  # white
        [255, 255, 0],    # yellow
    ],
    dtype=np.float64,
)

TAU = 55.0


def build_table() -> np.ndarray:
    q = np.arange(32) * 8.0 + 3.5  # bin centers of the 5-bit quantization
    r, g, b = np.meshgrid(q, q, q, indexing="ij")
    # row index is r + 32 g + 1024 b, i.e. b varies slowest
    centers = np.stack([r, g, b], axis=-1).transpose(2, 1, 0, 3).reshape(-1, 3)
    d2 = ((centers[:, None, :] - PROTOTYPES[None, :, :]) ** 2).sum(axis=2)
    logits = -d2 / (2.0 * TAU * TAU)
    logits -= logits.max(axis=1, keepdims=True)
    probs = np.exp(logits)
    probs /= probs.sum(axis=1, keepdims=True)
    return probs.astype("<f4")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(
        os.path.dirname(__file__), "..", "src", "fusetrack", "features",
        "assets", "cn_table.bin",
    )
    table = build_table()
    # sanity: saturated primaries map to the matching name
    for rgb, name in [((255, 0, 0), "red"), ((0, 255, 0), "green"),
                      ((0, 0, 255), "blue"), ((255, 255, 255), "white"),
                      ((0, 0, 0), "black"), ((255, 255, 0), "yellow")]:
        idx = (rgb[0] >> 3) + 32 * (rgb[1] >> 3) + 1024 * (rgb[2] >> 3)
        got = NAMES[int(table[idx].argmax())]
        assert got == name, f"{rgb} maps to {got}, wanted {name}"
    os.makedirs(os.path.dirname(out), exist_ok=True)
    table.tofile(out)
    print(f"wrote {out}: {table.shape[0]}x{table.shape[1]} float32")


if __name__ == "__main__":
    main()
