"""cv2-DNN darknet backend. Needs weight, config and class-name files on disk."""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import SidecarError

INPUT_SIZE = 416
NMS_THRESHOLD = 0.4


@dataclass(frozen=True)
class YoloConfig:
    weights_path: str
    net_config_path: str
    names_path: str
    score_floor: float = 0.1


class YoloBackend:
    """Same detect() contract as BlobBackend, backed by a darknet network."""

    def __init__(self, cfg: YoloConfig) -> None:
        for path in (cfg.weights_path, cfg.net_config_path, cfg.names_path):
            if not os.path.isfile(path):
                raise SidecarError(f"missing weights or network file: {path}")
        try:
            import cv2
        except ImportError as exc:
            raise SidecarError("the yolo backend needs opencv-python installed") from exc
        self._cv2 = cv2
        self.cfg = cfg
        with open(cfg.names_path, encoding="utf-8") as fh:
            self.names = [line.strip() for line in fh if line.strip()]
        if not self.names:
            raise SidecarError(f"no class names in {cfg.names_path}")
        self.net = cv2.dnn.readNetFromDarknet(cfg.net_config_path, cfg.weights_path)
        self._out_layers = self.net.getUnconnectedOutLayersNames()

    def detect(self, frame: np.ndarray) -> list[tuple[int, int, int, int, str, float]]:
        cv2 = self._cv2
        h, w = frame.shape[:2]
        blob = cv2.dnn.blobFromImage(
            frame, 1.0 / 255.0, (INPUT_SIZE, INPUT_SIZE), swapRB=False, crop=False
        )
        self.net.setInput(blob)
        boxes: list[list[int]] = []
        scores: list[float] = []
        class_ids: list[int] = []
        for layer in self.net.forward(self._out_layers):
            for row in layer:
                class_scores = row[5:]
                class_id = int(np.argmax(class_scores))
                score = float(class_scores[class_id])
                if score < self.cfg.score_floor:
                    continue
                bw = row[2] * w
                bh = row[3] * h
                bx = row[0] * w - bw / 2.0
                by = row[1] * h - bh / 2.0
                boxes.append([int(round(bx)), int(round(by)), int(round(bw)), int(round(bh))])
                scores.append(score)
                class_ids.append(class_id)
        keep = cv2.dnn.NMSBoxes(boxes, scores, self.cfg.score_floor, NMS_THRESHOLD)
        out = []
        for idx in np.array(keep).flatten():
            x, y, bw, bh = boxes[idx]
            out.append((x, y, bw, bh, self.names[class_ids[idx]], scores[idx]))
        return out
