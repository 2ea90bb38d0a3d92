#!/usr/bin/env python3
"""Reference runner for the model backend.

Usage: sam_onnx_runner.py WORKDIR

Reads WORKDIR/image.png and WORKDIR/request.json, runs an image encoder and a
prompt decoder exported to ONNX (models[0], models[1]), and writes
WORKDIR/logits.f32 (3 x side x side float32) and WORKDIR/response.json.
Requires numpy, Pillow and onnxruntime.
"""

import json
import sys
from pathlib import Path

import numpy as np
import onnxruntime as ort
from PIL import Image

PIXEL_MEAN = np.array([123.675, 116.28, 103.53], dtype=np.float32)
PIXEL_STD = np.array([58.395, 57.12, 57.375], dtype=np.float32)


def main(work: Path) -> int:
    req = json.loads((work / "request.json").read_text())
    models = req["models"]
    if len(models) != 2:
        print("expected encoder and decoder model paths", file=sys.stderr)
        return 2
    side = int(req["side"])
    providers = ["CUDAExecutionProvider", "CPUExecutionProvider"] if req.get("device") == "cuda" else [
        "CPUExecutionProvider"]
    encoder = ort.InferenceSession(models[0], providers=providers)
    decoder = ort.InferenceSession(models[1], providers=providers)

    image = np.asarray(Image.open(work / "image.png").convert("RGB"), dtype=np.float32)
    x = ((image - PIXEL_MEAN) / PIXEL_STD).transpose(2, 0, 1)[None]
    embeddings = encoder.run(None, {encoder.get_inputs()[0].name: x})[0]

    points = np.array(req["points"], dtype=np.float32).reshape(-1, 2)
    labels = np.array(req["labels"], dtype=np.float32).reshape(-1)
    # Padding point required by the exported decoder when no box is given.
    points = np.concatenate([points, np.zeros((1, 2), np.float32)])[None]
    labels = np.concatenate([labels, np.array([-1], np.float32)])[None]

    masks, scores, _ = decoder.run(None, {
        "image_embeddings": embeddings,
        "point_coords": points,
        "point_labels": labels,
        "mask_input": np.zeros((1, 1, 256, 256), np.float32),
        "has_mask_input": np.zeros(1, np.float32),
        "orig_im_size": np.array([side, side], np.float32),
    })
    masks, scores = masks[0], scores[0]
    if masks.shape[0] == 4:
        masks, scores = masks[1:], scores[1:]
    masks.astype("<f4").tofile(work / "logits.f32")
    (work / "response.json").write_text(json.dumps({"scores": [float(s) for s in scores]}))
    return 0


if __name__ == "__main__":
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        sys.exit(2)
    sys.exit(main(Path(sys.argv[1])))
