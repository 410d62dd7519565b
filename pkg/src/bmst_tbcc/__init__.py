"""Block Markov superposition transmission of tail-biting convolutional codes."""

from .bmst import BmstConfig, DecoderConfig, bmst_decode, bmst_encode
from .channel import ChannelModel, awgn, bpsk, reference_stats, snr_to_sigma
from .slva import SlvaSession, viterbi
from .tbcc import DEFAULT_GENERATORS, TbccCode, build_trellis, encode

__version__ = "0.1.0"

__all__ = [
    "BmstConfig", "ChannelModel", "DecoderConfig", "DEFAULT_GENERATORS", "SlvaSession",
    "TbccCode", "awgn", "bmst_decode", "bmst_encode", "bpsk", "build_trellis", "encode",
    "reference_stats", "snr_to_sigma", "viterbi",
]
