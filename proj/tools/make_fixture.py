#!/usr/bin/env python3
"""Generate an MNIST-format IDX fixture dataset for tests.

Real MNIST files are not bundled with the repository. This script builds a
stand-in dataset with the same file format and the class structure the
experiments rely on, from the handwritten-digit images that ship with
scikit-learn (1797 genuine 8x8 digits, upsampled to 28x28 and augmented
with small random affine transforms).

Class 9 is synthesized by point-rotating class-6 digits 180 degrees, which
gives the 6/9 pair the property the pipeline is probed on: matching
second-moment distributions with opposite third moments.

Usage: make_fixture.py OUTPUT_DIR [--seed N] [--count-major N] [--count-minor N]
Writes fixture-images-idx3-ubyte and fixture-labels-idx1-ubyte.
"""

import argparse
import os
import struct

import numpy as np
from scipy.ndimage import affine_transform, zoom
from sklearn.datasets import load_digits

MAJOR_CLASSES = (0, 1, 6, 9)  # classes the binary experiments use


def augment(img, rng):
    theta = rng.uniform(-0.05, 0.05)
    scale = rng.uniform(0.95, 1.05)
    shear = rng.uniform(-0.3, 0.3)  # slant varies widely between writers
    c, s = np.cos(theta) / scale, np.sin(theta) / scale
    rot = np.array([[c, -s], [s, c]])
    shr = np.array([[1.0, 0.0], [shear, 1.0]])  # x' = x + shear * y
    mat = rot @ shr
    center = np.array([13.5, 13.5])
    offset = center - mat @ center + rng.uniform(-1.0, 1.0, 2)
    out = np.clip(affine_transform(img, mat, offset=offset, order=1), 0, None)
    # cube and rescale: upsampling leaves strokes much broader than
    # MNIST's; sharpening restores thin-stroke geometry
    out = out ** 3
    return out * (255.0 / max(out.max(), 1e-9))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("output_dir")
    ap.add_argument("--seed", type=int, default=20240901)
    ap.add_argument("--count-major", type=int, default=1000)
    ap.add_argument("--count-minor", type=int, default=1000)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    digits = load_digits()
    base = np.clip(zoom(digits.images, (1, 3.5, 3.5), order=1), 0, None)
    base_labels = digits.target

    ys_g, xs_g = np.mgrid[0:28, 0:28]

    def width2(img):
        w = img ** 3
        w = w / w.sum()
        cx = (w * xs_g).sum()
        return (w * (xs_g - cx) ** 2).sum()

    images, labels = [], []
    for cls in range(10):
        pool = base[base_labels == (6 if cls == 9 else cls)]
        if cls == 1:
            # keep the thin-stroke styles; wide flag-and-serif ones are
            # rare in MNIST and would not be representative
            pool = np.array([im for im in pool if width2(im) <= 12.0])
        count = args.count_major if cls in MAJOR_CLASSES else args.count_minor
        for _ in range(count):
            img = augment(pool[rng.integers(len(pool))], rng)
            if cls == 9:
                img = img[::-1, ::-1]
            images.append(img)
            labels.append(cls)

    order = rng.permutation(len(labels))
    pixels = np.rint(np.stack(images)[order]).clip(0, 255).astype(np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)[order]

    os.makedirs(args.output_dir, exist_ok=True)
    with open(os.path.join(args.output_dir, "fixture-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x803, len(labels), 28, 28))
        f.write(pixels.tobytes())
    with open(os.path.join(args.output_dir, "fixture-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x801, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(labels)} images to {args.output_dir}")


if __name__ == "__main__":
    main()
