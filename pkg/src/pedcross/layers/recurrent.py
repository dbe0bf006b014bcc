import logging

from pedcross.autodiff import Tensor, gru_sequence, ops
from pedcross.errors import ShapeError
from pedcross.layers.params import GRUCellParams, RecurrentBlockParams

logger = logging.getLogger(__name__)

FORWARD = "forward"
REVERSE = "reverse"


def gru_cell(x: Tensor, h: Tensor, p: GRUCellParams) -> Tensor:
    """One GRU step for a (B, D) input and (B, H) state, composed from primitives"""
    if x.shape[-1] != p.input_size or h.shape[-1] != p.hidden_size:
        raise ShapeError(
            f"gru_cell: got input {x.shape} and state {h.shape}, "
            f"cell expects {p.input_size} inputs and {p.hidden_size} hidden units"
        )
    z = ops.sigmoid(ops.matmul(x, p.w_z) + ops.matmul(h, p.u_z) + p.b_z)
    r = ops.sigmoid(ops.matmul(x, p.w_r) + ops.matmul(h, p.u_r) + p.b_r)
    candidate = ops.tanh(ops.matmul(x, p.w_h) + ops.matmul(r * h, p.u_h) + p.b_h)
    return (1.0 - z) * h + z * candidate


def gru_layer(x: Tensor, p: GRUCellParams, direction: str = FORWARD) -> Tensor:
    """
    Run a GRU over a (B, T, D) sequence from a zero state.

    The output stays time-aligned with the input: in the reverse direction row t
    holds the state after consuming rows T-1 down to t.
    """
    if x.ndim != 3 or x.shape[1] == 0:
        raise ShapeError(f"gru_layer: expects a nonempty (B, T, D) sequence, got {x.shape}")
    if direction == FORWARD:
        return gru_sequence(x, *p.tensors())
    if direction == REVERSE:
        return ops.reverse(gru_sequence(ops.reverse(x, axis=1), *p.tensors()), axis=1)
    raise ValueError(f"Unknown direction '{direction}', expected '{FORWARD}' or '{REVERSE}'")


def ugru_block(x: Tensor, p: RecurrentBlockParams) -> Tensor:
    """Reverse GRU, concatenated with the input, then a forward GRU"""
    reversed_states = gru_layer(x, p.first, REVERSE)
    return gru_layer(ops.concat([reversed_states, x], axis=2), p.second, FORWARD)


def bigru_block(x: Tensor, p: RecurrentBlockParams) -> Tensor:
    """Forward and reverse GRUs over the same input, merged by sum"""
    return gru_layer(x, p.first, FORWARD) + gru_layer(x, p.second, REVERSE)


def gru_block(x: Tensor, p: RecurrentBlockParams) -> Tensor:
    return gru_layer(x, p.first, FORWARD)


_BLOCKS = {
    "ugru": ugru_block,
    "bigru": bigru_block,
    "gru": gru_block,
}


def recurrent_block(x: Tensor, p: RecurrentBlockParams) -> Tensor:
    if p.kind not in _BLOCKS:
        raise ValueError(f"Unknown recurrent kind '{p.kind}', expected one of {sorted(_BLOCKS)}")
    return _BLOCKS[p.kind](x, p)
