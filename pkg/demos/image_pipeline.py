"""From a PNG file to a boundary, using only the command line.

A bright disk on a noisy background is written to a grayscale PNG; the
``bayesbd`` CLI then fits it and scores the fit against the known circle.
The same steps work from a shell:

    bayesbd fit --input disk.png --family gaussian --out disk_fit.txt --svg disk.svg
    bayesbd metrics --fit disk_fit.txt --truth circle:r=0.3

Run:  python3 demos/image_pipeline.py [--out-dir DIR]
"""
import argparse
import os

import numpy as np
from PIL import Image

from bayesbd.cli import main
from bayesbd.imageio import read_fit

parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
parser.add_argument("--out-dir", default=".")
args = parser.parse_args()
out = lambda name: os.path.join(args.out_dir, name)

# a 120 x 120 image: disk of radius 0.3 (in unit-square coordinates)
rng = np.random.default_rng(0)
n = 120
u = (np.arange(n) + 0.5) / n
X, Y = np.meshgrid(u, 1 - u)            # row 0 is the top of the picture
disk = np.hypot(X - 0.5, Y - 0.5) < 0.3
img = np.where(disk, 170.0, 80.0) + rng.normal(0, 35, (n, n))
Image.fromarray(np.clip(img, 0, 255).astype(np.uint8)).save(out("disk.png"))

# fit, then score; intensities are rescaled to [0, 10] on load
main(["fit", "--input", out("disk.png"), "--family", "gaussian", "--seed", "3",
      "--out", out("disk_fit.txt"), "--svg", out("disk.svg")])
main(["metrics", "--fit", out("disk_fit.txt"), "--truth", "circle:r=0.3"])

fit = read_fit(out("disk_fit.txt"))
print(f"estimated radius range {fit.summary.estimate.min():.3f} .. "
      f"{fit.summary.estimate.max():.3f}; {fit.membership.sum()} pixels inside the outer band")
