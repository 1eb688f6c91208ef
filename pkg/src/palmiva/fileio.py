"""On-disk formats: a JSON header next to a raw little-endian float64 payload.

``<stem>.json`` holds the header, ``<stem>.bin`` the payload. Three kinds of
files exist:

* datasets: header ``{"K", "N", "V", "dtype": "f64", "order": "row-major"}``,
  payload the K ``N x V`` datasets concatenated;
* ground truth: header adds ``"kind": "ground_truth"``, ``"case"`` and
  ``"seed"``; payload is the K mixing slices followed by the N SCV
  covariance slices;
* demixing tensors: header ``{"kind": "demixing", "K", "N", ...}``, payload the
  K ``N x N`` slices.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DimensionError
from .synthgen import GroundTruth
from .tensor_model import DatasetStack

__all__ = [
    "header_path",
    "payload_path",
    "write_header",
    "read_header",
    "write_dataset",
    "read_dataset",
    "write_ground_truth",
    "read_ground_truth",
    "write_demixing",
    "read_demixing",
]

DTYPE = "<f8"


def header_path(path) -> Path:
    return Path(path).with_suffix(".json")


def payload_path(path) -> Path:
    return Path(path).with_suffix(".bin")


def write_header(path, header: dict) -> None:
    header_path(path).write_text(json.dumps(header, indent=2, sort_keys=True) + "\n")


def read_header(path) -> dict:
    return json.loads(header_path(path).read_text())


def _write_payload(path, *arrays) -> None:
    with open(payload_path(path), "wb") as fh:
        for a in arrays:
            fh.write(np.ascontiguousarray(a, dtype=DTYPE).tobytes())


def _read_payload(path, count: int) -> np.ndarray:
    flat = np.fromfile(payload_path(path), dtype=DTYPE)
    if flat.size != count:
        raise DimensionError(
            f"{payload_path(path)} holds {flat.size} values, header implies {count}"
        )
    return flat.astype(float)


def _check_common(header: dict) -> None:
    if header.get("dtype") != "f64" or header.get("order") != "row-major":
        raise DimensionError(f"unsupported dtype/order in header: {header}")


def write_dataset(path, stack: DatasetStack) -> dict:
    K, N, V = stack.data.shape
    header = {"K": K, "N": N, "V": V, "dtype": "f64", "order": "row-major"}
    write_header(path, header)
    _write_payload(path, stack.data)
    return header


def read_dataset(path) -> DatasetStack:
    h = read_header(path)
    _check_common(h)
    K, N, V = h["K"], h["N"], h["V"]
    return DatasetStack(_read_payload(path, K * N * V).reshape(K, N, V))


def write_ground_truth(path, truth: GroundTruth, seed: int, V: int) -> dict:
    K, N, _ = truth.A.shape
    header = {
        "kind": "ground_truth",
        "K": K,
        "N": N,
        "V": V,
        "case": truth.case_label,
        "seed": int(seed),
        "dtype": "f64",
        "order": "row-major",
    }
    write_header(path, header)
    _write_payload(path, truth.A, truth.Sigma)
    return header


def read_ground_truth(path) -> tuple[GroundTruth, dict]:
    h = read_header(path)
    _check_common(h)
    if h.get("kind") != "ground_truth":
        raise DimensionError(f"{header_path(path)} is not a ground-truth header")
    K, N = h["K"], h["N"]
    flat = _read_payload(path, K * N * N + N * K * K)
    A = flat[: K * N * N].reshape(K, N, N)
    Sigma = flat[K * N * N:].reshape(N, K, K)
    return GroundTruth(A=A, Sigma=Sigma, case_label=h["case"]), h


def write_demixing(path, W: np.ndarray) -> dict:
    K, N, _ = W.shape
    header = {"kind": "demixing", "K": K, "N": N, "dtype": "f64", "order": "row-major"}
    write_header(path, header)
    _write_payload(path, W)
    return header


def read_demixing(path) -> np.ndarray:
    h = read_header(path)
    _check_common(h)
    K, N = h["K"], h["N"]
    return _read_payload(path, K * N * N).reshape(K, N, N)
