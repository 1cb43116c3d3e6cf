#!/usr/bin/env python3
# Copyright 2026 The detcert Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes the hand-built toy detector, its synthetic images and a sweep query.

The detector sees a 1x8x8 image with one bright 4x4 square on a dark
background. A 2x2 grid of cells (stride 4) each owns one anchor; a cell's
objectness grows with the brightness contrast inside it, and its width and
height offsets shrink when that contrast fades.

    python3 tools/make_toy_detector.py tests/data/toy_detector
"""

import json
import sys
from pathlib import Path

H = W = 8
GRID = 2
STRIDE = 4
FIELDS = 7  # o0 o1 o2 o3 obj c0 c1
POOLED = 4  # pooled map is 4x4 per channel
FULL = 1.76  # cell contrast sum for a clean 0.9 / 0.1 square

BETA = 6.0
OBJ_GAIN, OBJ_BIAS = 4.0, -2.0
SIZE_GAIN = 0.05


def flat(ch, py, px):
    return ch * POOLED * POOLED + py * POOLED + px


def cell_blocks(cx, cy):
    return [(2 * cy + dy, 2 * cx + dx) for dy in (0, 1) for dx in (0, 1)]


def contrast_row(blocks, scale):
    # Sum over blocks of (pooled channel 0 - pooled channel 1), times scale.
    row = [0.0] * (2 * POOLED * POOLED)
    for py, px in blocks:
        row[flat(0, py, px)] += scale
        row[flat(1, py, px)] -= scale
    return row


def head_layer():
    weights, bias = [], []
    for cy in range(GRID):
        for cx in range(GRID):
            blocks = cell_blocks(cx, cy)
            left = [b for b in blocks if b[1] == 2 * cx]
            right = [b for b in blocks if b[1] == 2 * cx + 1]
            top = [b for b in blocks if b[0] == 2 * cy]
            bottom = [b for b in blocks if b[0] == 2 * cy + 1]
            o0 = [r - l for r, l in zip(contrast_row(right, BETA), contrast_row(left, BETA))]
            o1 = [b - t for b, t in zip(contrast_row(bottom, BETA), contrast_row(top, BETA))]
            size = contrast_row(blocks, SIZE_GAIN)
            rows = [
                (o0, 0.0),
                (o1, 0.0),
                (size, -SIZE_GAIN * FULL),
                (size, -SIZE_GAIN * FULL),
                (contrast_row(blocks, OBJ_GAIN), OBJ_BIAS),
                (contrast_row(blocks, 1.0), 1.0),
                ([0.0] * (2 * POOLED * POOLED), 0.0),
            ]
            for w, b in rows:
                weights.extend(w)
                bias.append(b)
    return {
        "kind": "dense",
        "in": 2 * POOLED * POOLED,
        "out": GRID * GRID * FIELDS,
        "inline": True,
        "weights": weights,
        "bias": bias,
    }


def model():
    conv_w = [0.0] * 18
    conv_w[4] = 1.0  # channel 0 centre tap
    conv_w[9 + 4] = -1.0  # channel 1 centre tap
    return {
        "format_version": 1,
        "input_shape": [1, H, W],
        "layers": [
            {"kind": "conv2d", "in_channels": 1, "out_channels": 2, "kernel": [3, 3], "stride": 1,
             "padding": 1, "inline": True, "weights": conv_w, "bias": [-0.5, 0.5]},
            {"kind": "leakyrelu", "alpha": 0.1},
            {"kind": "avgpool2d", "window": 2, "stride": 2},
            {"kind": "flatten"},
            head_layer(),
        ],
        "head": {
            "decoder": "yolov2",
            "n_classes": 2,
            "anchors": [{"p": [cx, cy, 1.0, 1.0], "stride": STRIDE} for cy in range(GRID) for cx in range(GRID)],
            "layout": {"kind": "box_major"},
        },
    }


def square(x0, y0, fg, bg):
    data = [bg] * (H * W)
    for y in range(y0, y0 + 4):
        for x in range(x0, x0 + 4):
            data[y * W + x] = fg
    return {"shape": [1, H, W], "data": data}


IMAGES = [
    (0, 0, 0.9, 0.1),
    (4, 0, 0.9, 0.1),
    (0, 4, 0.9, 0.1),
    (4, 4, 0.9, 0.1),
    (0, 0, 0.8, 0.2),
    (4, 4, 0.8, 0.2),
]


def main():
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "tests/data/toy_detector")
    out.mkdir(parents=True, exist_ok=True)
    (out / "model.json").write_text(json.dumps(model(), indent=1) + "\n")
    entries = []
    for i, (x0, y0, fg, bg) in enumerate(IMAGES):
        name = f"image_{i}.json"
        (out / name).write_text(json.dumps(square(x0, y0, fg, bg)) + "\n")
        entries.append({"image": name, "ground_truth": {"box": [x0, y0, x0 + 4, y0 + 4], "class_id": 0}})
    query = {
        "model": "model.json",
        "images": entries,
        "tau_iou": 0.5,
        "tau_class": 0.15,
        "perturbations": [
            {"kind": "brightness"},
            {"kind": "contrast"},
            {"kind": "motionblur", "angle": 0, "kernel_size": 5},
            {"kind": "motionblur", "angle": 45, "kernel_size": 5},
        ],
        "budgets": [0, 0.05, 0.1, 0.3, 0.5, 1.0],
        "solver": {"bounding": "optimal", "propagation": "backsub", "max_depth": 10, "timeout": 60, "seed": 0},
    }
    (out / "query.json").write_text(json.dumps(query, indent=2) + "\n")


if __name__ == "__main__":
    main()
