"""Torch feature networks and the activation tap points.

Two backbones cover the three export kinds:

* a 16-layer VGG-style image network; ``rgb_shallow`` taps the 4th
  convolution's post-ReLU output (128 channels, stride 2 at 224 px input),
  ``rgb_deep`` the 13th and last (512 channels, stride 16);
* a 5-convolution flow network in the classic AlexNet geometry whose
  deepest layer yields 384 channels at stride 16.

Weights come from a state-dict file, or from the documented deterministic
stand-in ``untrained:SEED`` which seeds the initializer. The stand-in keeps
the pipeline reproducible on machines without the pretrained files; the
binding contract downstream is only (channels, stride) per kind.
"""

import os

import numpy as np
import torch
import torch.nn as nn

__all__ = ["KIND_TABLE", "FeatureNet", "load_net", "MissingWeightsError"]

# kind -> (channels, stride, tap convolution index, backbone)
KIND_TABLE = {
    "rgb_shallow": (128, 2, 4, "image"),
    "rgb_deep": (512, 16, 13, "image"),
    "motion_deep": (384, 16, 5, "flow"),
}

_IMAGE_MEAN = np.array([0.485, 0.456, 0.406], np.float32)
_IMAGE_STD = np.array([0.229, 0.224, 0.225], np.float32)

_VGG_PLAN = [64, 64, "M", 128, 128, "M", 256, 256, 256, "M", 512, 512, 512, "M", 512, 512, 512]


class MissingWeightsError(FileNotFoundError):
    pass


def _image_backbone() -> nn.Sequential:
    layers = []
    chans = 3
    for v in _VGG_PLAN:
        if v == "M":
            layers.append(nn.MaxPool2d(2, 2))
        else:
            layers += [nn.Conv2d(chans, v, 3, padding=1), nn.ReLU(inplace=True)]
            chans = v
    return nn.Sequential(*layers)


def _flow_backbone() -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(3, 96, 11, stride=4, padding=5),
        nn.ReLU(inplace=True),
        nn.MaxPool2d(3, 2, padding=1),
        nn.Conv2d(96, 256, 5, padding=2),
        nn.ReLU(inplace=True),
        nn.MaxPool2d(3, 2, padding=1),
        nn.Conv2d(256, 384, 3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(384, 384, 3, padding=1),
        nn.ReLU(inplace=True),
        nn.Conv2d(384, 384, 3, padding=1),
        nn.ReLU(inplace=True),
    )


def _seed_init(net: nn.Sequential, seed: int) -> None:
    gen = torch.Generator().manual_seed(seed)
    for mod in net.modules():
        if isinstance(mod, nn.Conv2d):
            fan_in = mod.in_channels * mod.kernel_size[0] * mod.kernel_size[1]
            std = (2.0 / fan_in) ** 0.5
            with torch.no_grad():
                mod.weight.copy_(torch.randn(mod.weight.shape, generator=gen) * std)
                mod.bias.zero_()


class FeatureNet:
    """A backbone truncated at one post-ReLU tap point."""

    def __init__(self, kind: str, weights: str):
        if kind not in KIND_TABLE:
            raise ValueError(f"unknown network kind {kind!r}")
        self.kind = kind
        channels, stride, tap, backbone = KIND_TABLE[kind]
        self.channels = channels
        self.stride = stride
        net = _image_backbone() if backbone == "image" else _flow_backbone()

        if weights.startswith("untrained:"):
            try:
                seed = int(weights.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"bad stand-in spec {weights!r}, want untrained:SEED") from None
            _seed_init(net, seed)
        else:
            if not os.path.isfile(weights):
                raise MissingWeightsError(f"weights file not found: {weights}")
            state = torch.load(weights, map_location="cpu", weights_only=True)
            net.load_state_dict(state)

        # truncate right after the tap convolution's ReLU
        keep, convs = [], 0
        for layer in net:
            keep.append(layer)
            if isinstance(layer, nn.ReLU):
                convs += 1
                if convs == tap:
                    break
        self.net = nn.Sequential(*keep).eval()
        self.is_image = backbone == "image"

    def __call__(self, patch: np.ndarray) -> np.ndarray:
        """(H, W, 3) uint8/float patch -> (channels, M, N) float32."""
        arr = np.asarray(patch, np.float32) / 255.0
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected an HxWx3 patch, got {arr.shape}")
        if self.is_image:
            arr = (arr - _IMAGE_MEAN) / _IMAGE_STD
        else:
            arr = arr - 0.5
        x = torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1)))[None]
        with torch.no_grad():
            out = self.net(x)[0]
        return out.numpy().astype(np.float32)


def load_net(kind: str, weights: str) -> FeatureNet:
    return FeatureNet(kind, weights)
