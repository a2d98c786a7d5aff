#!/usr/bin/env python3
"""Writes a small DELSW1 network, its JSON manifest and fixtures.bin.

The network is random; the fixture outputs are computed here in float64 so the
C++ inference path can be checked against an independent implementation.
"""
import argparse
import json
import pathlib
import struct

import numpy as np

K = 12
CHANNELS = 3


def leaky_relu(x):
    return np.where(x < 0.0, 0.01 * x, x)


def forward(layers, mean, std, x):
    a = (x - mean) / std
    for i, (w, b) in enumerate(layers):
        a = w.astype(np.float64) @ a + b.astype(np.float64)
        if i + 1 < len(layers):
            a = leaky_relu(a)
    a = a - a.max()
    p = np.exp(a)
    return p / p.sum()


def write_weights(path, layers, mean, std):
    with open(path, "wb") as f:
        f.write(b"DELSW1")
        f.write(struct.pack("<I", len(layers)))
        for w, _ in layers:
            f.write(struct.pack("<II", *w.shape))
        for w, b in layers:
            f.write(w.astype("<f4").tobytes(order="C"))
            f.write(b.astype("<f4").tobytes())
        f.write(mean.astype("<f4").tobytes())
        f.write(std.astype("<f4").tobytes())


def write_manifest(path, layers, calibration):
    manifest = {
        "format": "DELSW1",
        "k": K,
        "channels": CHANNELS,
        "input_dim": int(layers[0][0].shape[1]),
        "output_dim": int(layers[-1][0].shape[0]),
        "layers": [{"rows": int(w.shape[0]), "cols": int(w.shape[1])}
                   for w, _ in layers],
        "confidence_calibration": calibration,
    }
    path.write_text(json.dumps(manifest, indent=2) + "\n")


def write_fixtures(path, inputs, outputs):
    with open(path, "wb") as f:
        f.write(struct.pack("<III", len(inputs), inputs.shape[1],
                            outputs.shape[1]))
        for x, y in zip(inputs, outputs):
            f.write(x.astype("<f4").tobytes())
            f.write(y.astype("<f4").tobytes())


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", type=pathlib.Path, required=True)
    parser.add_argument("--seed", type=int, default=20240611)
    parser.add_argument("--count", type=int, default=100)
    args = parser.parse_args()
    rng = np.random.default_rng(args.seed)

    dims = [(K + 1) * CHANNELS, 32, 32, K]
    layers = []
    for cols, rows in zip(dims[:-1], dims[1:]):
        w = rng.normal(0.0, 1.0 / np.sqrt(cols), (rows, cols)).astype(np.float32)
        b = rng.normal(0.0, 0.1, rows).astype(np.float32)
        layers.append((w, b))
    mean = rng.normal(0.0, 0.1, dims[0]).astype(np.float32)
    std = rng.uniform(0.2, 1.0, dims[0]).astype(np.float32)

    # Intensity channel in [0, 1], gradient channels around zero.
    inputs = rng.uniform(-0.3, 0.3, (args.count, dims[0]))
    inputs[:, 0::CHANNELS] = rng.uniform(0.0, 1.0, (args.count, K + 1))
    inputs = inputs.astype(np.float32)
    outputs = np.stack([
        forward(layers, mean.astype(np.float64), std.astype(np.float64),
                x.astype(np.float64))
        for x in inputs
    ]).astype(np.float32)

    args.out.mkdir(parents=True, exist_ok=True)
    weights = args.out / "classifier.delsw"
    write_weights(weights, layers, mean, std)
    write_manifest(args.out / "classifier.delsw.json", layers,
                   {"scale": 6.0, "offset": -3.0})
    write_fixtures(args.out / "fixtures.bin", inputs, outputs)


if __name__ == "__main__":
    main()
