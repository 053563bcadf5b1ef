#!/usr/bin/env python3
"""Builds the 512x512 RGB test photos from the public-domain / CC0 samples
shipped with scikit-image. Each source is center-cropped to a square and
resampled with Lanczos filtering."""
import os
import sys

import skimage.data
from PIL import Image

SOURCES = {
    "astronaut": "astronaut.png",        # NASA, public domain
    "coffee": "coffee.png",              # CC0, Rachel Michetti
    "chelsea": "chelsea.png",            # CC0, Stefan van der Walt
    "rocket": "rocket.jpg",              # NASA, public domain
    "hubble": "hubble_deep_field.jpg",   # NASA, public domain
}

out_dir = sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/data/photos"
os.makedirs(out_dir, exist_ok=True)
base = os.path.dirname(skimage.data.__file__)
for name, file in SOURCES.items():
    im = Image.open(os.path.join(base, file)).convert("RGB")
    w, h = im.size
    s = min(w, h)
    left, top = (w - s) // 2, (h - s) // 2
    im = im.crop((left, top, left + s, top + s))
    if s != 512:
        im = im.resize((512, 512), Image.LANCZOS)
    im.save(os.path.join(out_dir, name + ".png"), optimize=True)
    print(name, im.size)
