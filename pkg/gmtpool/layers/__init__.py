from gmtpool.layers.encoder import Encoder, RowEncoder, encode  # noqa: F401
from gmtpool.layers.gcn import GcnLayer, gcn_forward  # noqa: F401

__all__ = ["Encoder", "GcnLayer", "RowEncoder", "encode", "gcn_forward"]
