"""
SR-Net architecture description.

An SR-Net is a parameter-free input pooling, a strided stem convolution,
stages of sparse residual blocks and a single-logit head on global average
pooled features. Each block stacks four same-shape convolution + ReLU layers
and adds the block input to their output. Between stages a parameter-free
transition halves the feature map with 2 x 2 average pooling and zero-pads the
channels up to the next stage's width, so only convolutions and the head carry
weights.
"""
from dataclasses import dataclass
from typing import List, Tuple

from .exceptions import ArchitectureError


DESCRIPTOR_HEADER = 'srnet-arch v1'
CONVS_PER_BLOCK = 4
TRANSITION_POOL = (2, 2)


@dataclass(frozen=True)
class ArchitectureConfig:
    """
    Structural hyperparameters of an SR-Net.

    Attributes:
        input_shape: Window shape (H, W)
        stem_channels: Output channels of the stem convolution
        stem_stride: Stride of the stem convolution
        stages: (channels, block count) per stage; channels never decrease and
            the first stage runs at `stem_channels`
        kernel_size: Odd square kernel size of every convolution
        input_pool: Average pooling applied to the raw window before the stem
    """
    input_shape: Tuple[int, int]
    stem_channels: int = 8
    stem_stride: int = 2
    stages: Tuple[Tuple[int, int], ...] = ((8, 1), (16, 1))
    kernel_size: int = 3
    input_pool: Tuple[int, int] = (1, 1)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if len(self.input_shape) != 2 or min(self.input_shape) < 1:
            raise ArchitectureError(f"input_shape must be two positive sizes, got {self.input_shape}")
        if self.kernel_size < 1 or self.kernel_size % 2 == 0:
            raise ArchitectureError(f"kernel_size must be odd and positive, got {self.kernel_size}")
        if self.stem_channels < 1 or self.stem_stride < 1:
            raise ArchitectureError("stem_channels and stem_stride must be positive")
        if len(self.input_pool) != 2 or min(self.input_pool) < 1:
            raise ArchitectureError(f"input_pool must be two positive sizes, got {self.input_pool}")
        if not self.stages:
            raise ArchitectureError("At least one stage is required")
        if self.stages[0][0] != self.stem_channels:
            raise ArchitectureError(
                f"First stage width {self.stages[0][0]} must equal stem_channels {self.stem_channels}"
            )
        previous = self.stem_channels
        for channels, blocks in self.stages:
            if blocks < 1 or channels < previous:
                raise ArchitectureError(f"Stage ({channels}, {blocks}) must have >= 1 block and non-decreasing width")
            previous = channels
        for height, width in self.feature_shapes():
            if height < 1 or width < 1:
                raise ArchitectureError(f"Input {self.input_shape} is too small for this architecture")

    @property
    def padding(self) -> int:
        return self.kernel_size // 2

    def pooled_input_shape(self) -> Tuple[int, int]:
        return (self.input_shape[0] // self.input_pool[0], self.input_shape[1] // self.input_pool[1])

    def feature_shapes(self) -> List[Tuple[int, int]]:
        """Spatial size of the feature map inside each stage."""
        height, width = self.pooled_input_shape()
        k, p, s = self.kernel_size, self.padding, self.stem_stride
        height = (height + 2 * p - k) // s + 1
        width = (width + 2 * p - k) // s + 1
        shapes = [(height, width)]
        for _ in self.stages[1:]:
            height //= TRANSITION_POOL[0]
            width //= TRANSITION_POOL[1]
            shapes.append((height, width))
        return shapes

    @property
    def output_channels(self) -> int:
        return self.stages[-1][0]

    @property
    def trainable_layers(self) -> int:
        """Stem + four convolutions per block + head."""
        return 1 + CONVS_PER_BLOCK * sum(blocks for _, blocks in self.stages) + 1

    def param_shapes(self) -> List[Tuple[str, Tuple[int, ...]]]:
        """Ordered (name, shape) of every trainable tensor."""
        k = self.kernel_size
        shapes = [
            ('stem.w', (self.stem_channels, 1, k, k)),
            ('stem.b', (self.stem_channels,)),
        ]
        for s, (channels, blocks) in enumerate(self.stages):
            for b in range(blocks):
                for i in range(1, CONVS_PER_BLOCK + 1):
                    prefix = f"stage{s}.block{b}.conv{i}"
                    shapes.append((f"{prefix}.w", (channels, channels, k, k)))
                    shapes.append((f"{prefix}.b", (channels,)))
        shapes.append(('head.w', (self.output_channels,)))
        shapes.append(('head.b', (1,)))
        return shapes

    def describe(self) -> str:
        """Versioned plain-text descriptor; two architectures are compatible iff descriptors match."""
        stages = ' '.join(f"{channels}x{blocks}" for channels, blocks in self.stages)
        return '\n'.join([
            DESCRIPTOR_HEADER,
            f"input {self.input_shape[0]} {self.input_shape[1]}",
            f"input_pool {self.input_pool[0]} {self.input_pool[1]}",
            f"stem {self.stem_channels} {self.stem_stride}",
            f"stages {stages}",
            f"kernel {self.kernel_size}",
            f"layers {self.trainable_layers}",
        ])


def parse_descriptor(text: str) -> ArchitectureConfig:
    """
    Rebuild an ArchitectureConfig from `describe()` output.

    Raises:
        ArchitectureError: On an unknown version or malformed text
    """
    lines = text.strip().splitlines()
    if not lines or lines[0].strip() != DESCRIPTOR_HEADER:
        raise ArchitectureError(f"Unsupported architecture descriptor header: {lines[:1]}")
    fields = {}
    for line in lines[1:]:
        key, _, value = line.strip().partition(' ')
        fields[key] = value.split()
    try:
        config = ArchitectureConfig(
            input_shape=(int(fields['input'][0]), int(fields['input'][1])),
            input_pool=(int(fields['input_pool'][0]), int(fields['input_pool'][1])),
            stem_channels=int(fields['stem'][0]),
            stem_stride=int(fields['stem'][1]),
            stages=tuple(
                (int(channels), int(blocks))
                for channels, blocks in (item.split('x') for item in fields['stages'])
            ),
            kernel_size=int(fields['kernel'][0]),
        )
    except (KeyError, IndexError, ValueError) as e:
        if isinstance(e, ArchitectureError):
            raise
        raise ArchitectureError(f"Malformed architecture descriptor: {e}")
    if 'layers' in fields and int(fields['layers'][0]) != config.trainable_layers:
        raise ArchitectureError("Descriptor layer count does not match its structure")
    return config


def desk_preset(input_shape: Tuple[int, int] = (64, 512)) -> ArchitectureConfig:
    """Ten trainable layers: stem, two single-block stages (8 and 16 channels), head."""
    pool = (2, 4) if input_shape[0] >= 32 and input_shape[1] >= 128 else (1, 2)
    return ArchitectureConfig(
        input_shape=input_shape,
        stem_channels=8,
        stem_stride=2,
        stages=((8, 1), (16, 1)),
        kernel_size=3,
        input_pool=pool
    )


def full_preset(input_shape: Tuple[int, int] = (64, 512)) -> ArchitectureConfig:
    """Twenty-six trainable layers: stem, three stages of two blocks, head."""
    return ArchitectureConfig(
        input_shape=input_shape,
        stem_channels=8,
        stem_stride=2,
        stages=((8, 2), (16, 2), (32, 2)),
        kernel_size=3,
        input_pool=(1, 1)
    )


PRESETS = {
    'desk': desk_preset,
    'full': full_preset,
}
