"""Named parameter tensors for the whole model."""
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import numpy as np
from loguru import logger

from config.errors import VersionError
from config.schema import ModelConfig
from numerics import NdArray, SeededRng, parameter
from vocab.vocabulary import PAD_ID

FORGET_BIAS = 1.0


@dataclass
class LstmCellParams:
    """Input-to-hidden W [d_in x 4H], hidden-to-hidden U [H x 4H], bias b [4H].

    Gate blocks along the last axis are ordered input, forget, output, candidate.
    """
    W: NdArray
    U: NdArray
    b: NdArray

    @property
    def input_size(self) -> int:
        return self.W.shape[0]

    @property
    def hidden_size(self) -> int:
        return self.U.shape[0]


@dataclass
class EncoderParams:
    token_fw: LstmCellParams
    token_bw: LstmCellParams
    smooth_fw: LstmCellParams
    smooth_bw: LstmCellParams
    W_p_hat: NdArray  # passage-side perspectives [Z x D]
    W_q_hat: NdArray  # question-side perspectives [Z x D]
    w_plus: Optional[NdArray] = None  # [2D]
    w_minus: Optional[NdArray] = None  # [2D]
    w_m: Optional[NdArray] = None  # [Z]

    @property
    def uses_negatives(self) -> bool:
        return self.w_m is not None


@dataclass
class DecoderParams:
    cell: LstmCellParams
    w_h: NdArray
    w_s: NdArray
    b_e: NdArray
    w_h_q: NdArray
    w_s_q: NdArray
    b_e_q: NdArray
    W_out: NdArray  # [Vd x F]
    b_v: NdArray
    W_g: NdArray  # [3 x F]
    b_g: NdArray


def parameter_shapes(config: ModelConfig) -> Dict[str, Tuple[int, ...]]:
    """Every tensor the configured architecture owns, by name."""
    D, Z, S = config.embed_dim, config.perspectives, config.decoder_hidden
    Wm, Wq, F = config.memory_width, config.mpm_width, config.feature_width
    shapes: Dict[str, Tuple[int, ...]] = {"embedding": (config.vocab_size, D)}

    def lstm(prefix: str, d_in: int, h: int) -> None:
        shapes[f"{prefix}.W"] = (d_in, 4 * h)
        shapes[f"{prefix}.U"] = (h, 4 * h)
        shapes[f"{prefix}.b"] = (4 * h,)

    lstm("enc.token.fw", D, D)
    lstm("enc.token.bw", D, D)
    lstm("enc.smooth.fw", 2 * Z, Z)
    lstm("enc.smooth.bw", 2 * Z, Z)
    shapes["enc.W_p_hat"] = (Z, D)
    shapes["enc.W_q_hat"] = (Z, D)
    if config.uses_negatives:
        shapes["enc.w_plus"] = (2 * D,)
        shapes["enc.w_minus"] = (2 * D,)
        shapes["enc.w_m"] = (Z,)
    if config.uses_unified_memory:
        shapes["mem.W_p"] = (config.pam_rows, config.pam_width)

    lstm("dec.cell", config.decoder_input_width, S)
    shapes["dec.w_h"] = (Wm,)
    shapes["dec.w_s"] = (S,)
    shapes["dec.b_e"] = (1,)
    shapes["dec.w_h_q"] = (Wq,)
    shapes["dec.w_s_q"] = (S,)
    shapes["dec.b_e_q"] = (1,)
    shapes["dec.W_out"] = (config.decoder_vocab_size, F)
    shapes["dec.b_v"] = (config.decoder_vocab_size,)
    shapes["dec.W_g"] = (3, F)
    shapes["dec.b_g"] = (3,)
    return shapes


def _is_bias(name: str) -> bool:
    return name.endswith(".b") or name.split(".")[-1].startswith("b_")


def glorot_uniform(rng: SeededRng, shape: Tuple[int, ...]) -> np.ndarray:
    fan_in = shape[0] if shape else 1
    fan_out = shape[1] if len(shape) > 1 else 1
    limit = np.sqrt(6.0 / max(fan_in + fan_out, 1))
    return rng.uniform(-limit, limit, shape)


class ModelParams:
    """Ordered mapping of parameter name to NdArray, plus typed views."""

    def __init__(self, config: ModelConfig, tensors: Mapping[str, NdArray]):
        self.config = config
        self.tensors: Dict[str, NdArray] = dict(tensors)

    @classmethod
    def initialize(cls, config: ModelConfig, rng: SeededRng) -> "ModelParams":
        """Glorot-uniform matrices, zero biases, forget-gate bias 1.0, zero PAD row."""
        tensors = {}
        for name, shape in parameter_shapes(config).items():
            if _is_bias(name):
                data = np.zeros(shape)
                if name.endswith("fw.b") or name.endswith("bw.b") or name == "dec.cell.b":
                    h = shape[0] // 4
                    data[h:2 * h] = FORGET_BIAS
            else:
                data = glorot_uniform(rng, shape)
            tensors[name] = parameter(data, name=name)
        tensors["embedding"].data[PAD_ID] = 0.0
        n = sum(t.size for t in tensors.values())
        logger.debug(f"Initialized {len(tensors)} parameter tensors ({n} values)")
        return cls(config, tensors)

    @classmethod
    def zeros(cls, config: ModelConfig) -> "ModelParams":
        return cls(config, {n: parameter(np.zeros(s), name=n) for n, s in parameter_shapes(config).items()})

    @classmethod
    def from_arrays(cls, config: ModelConfig, arrays: Mapping[str, np.ndarray]) -> "ModelParams":
        """Rebuild from stored arrays; names and shapes must match the config exactly."""
        expected = parameter_shapes(config)
        missing = sorted(set(expected) - set(arrays))
        extra = sorted(set(arrays) - set(expected))
        if missing or extra:
            raise VersionError(f"parameter set does not match config (missing {missing}, unexpected {extra})")
        tensors = {}
        for name, shape in expected.items():
            data = np.asarray(arrays[name], dtype=np.float64)
            if data.shape != shape:
                raise VersionError(f"parameter {name} has shape {data.shape}, config expects {shape}")
            tensors[name] = parameter(data.copy(), name=name)
        return cls(config, tensors)

    def __getitem__(self, name: str) -> NdArray:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def __iter__(self) -> Iterator[str]:
        return iter(self.tensors)

    def names(self) -> List[str]:
        return list(self.tensors)

    def items(self):
        return self.tensors.items()

    def arrays(self) -> Dict[str, np.ndarray]:
        return {n: t.data for n, t in self.tensors.items()}

    def zero_grad(self) -> None:
        for t in self.tensors.values():
            t.zero_grad()

    def num_values(self) -> int:
        return sum(t.size for t in self.tensors.values())

    def lstm(self, prefix: str) -> LstmCellParams:
        return LstmCellParams(self[f"{prefix}.W"], self[f"{prefix}.U"], self[f"{prefix}.b"])

    def _optional(self, name: str) -> Optional[NdArray]:
        return self.tensors.get(name)

    @property
    def encoder(self) -> EncoderParams:
        return EncoderParams(
            token_fw=self.lstm("enc.token.fw"),
            token_bw=self.lstm("enc.token.bw"),
            smooth_fw=self.lstm("enc.smooth.fw"),
            smooth_bw=self.lstm("enc.smooth.bw"),
            W_p_hat=self["enc.W_p_hat"],
            W_q_hat=self["enc.W_q_hat"],
            w_plus=self._optional("enc.w_plus"),
            w_minus=self._optional("enc.w_minus"),
            w_m=self._optional("enc.w_m"),
        )

    @property
    def alignment(self) -> Optional[NdArray]:
        return self._optional("mem.W_p")

    @property
    def decoder(self) -> DecoderParams:
        return DecoderParams(
            cell=self.lstm("dec.cell"),
            w_h=self["dec.w_h"],
            w_s=self["dec.w_s"],
            b_e=self["dec.b_e"],
            w_h_q=self["dec.w_h_q"],
            w_s_q=self["dec.w_s_q"],
            b_e_q=self["dec.b_e_q"],
            W_out=self["dec.W_out"],
            b_v=self["dec.b_v"],
            W_g=self["dec.W_g"],
            b_g=self["dec.b_g"],
        )
