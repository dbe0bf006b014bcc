import logging

import numpy as np

from pedcross.autodiff.tensor import Function, Tensor
from pedcross.errors import ShapeError

logger = logging.getLogger(__name__)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    ex = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + ex), ex / (1.0 + ex))


class GRUSequence(Function):
    """
    Forward-in-time GRU over a whole (B, T, D) sequence with h0 = 0.

    Gate convention per step:
        z = sigmoid(x Wz + h Uz + bz)
        r = sigmoid(x Wr + h Ur + br)
        c = tanh(x Wh + (r * h) Uh + bh)
        h' = (1 - z) * h + z * c
    Output is the (B, T, H) stack of states. Backward is hand-written BPTT.
    """

    def forward(self, x, w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h):
        if x.ndim != 3:
            raise ShapeError(f"gru: expects a (B, T, D) sequence, got {x.shape}")
        batch, steps, in_dim = x.shape
        if steps == 0:
            raise ShapeError("gru: empty sequence")
        hidden = u_z.shape[0]
        for name, arr, expected in (
            ("Wz", w_z, (in_dim, hidden)), ("Wr", w_r, (in_dim, hidden)), ("Wh", w_h, (in_dim, hidden)),
            ("Uz", u_z, (hidden, hidden)), ("Ur", u_r, (hidden, hidden)), ("Uh", u_h, (hidden, hidden)),
            ("bz", b_z, (hidden,)), ("br", b_r, (hidden,)), ("bh", b_h, (hidden,)),
        ):
            if arr.shape != expected:
                raise ShapeError(f"gru: {name} has shape {arr.shape}, expected {expected} for input {x.shape}")

        self.x = x
        self.weights = (w_z, w_r, w_h, u_z, u_r, u_h)
        flat = x.reshape(batch * steps, in_dim)
        xz = (flat @ w_z + b_z).reshape(batch, steps, hidden)
        xr = (flat @ w_r + b_r).reshape(batch, steps, hidden)
        xh = (flat @ w_h + b_h).reshape(batch, steps, hidden)

        self.z = np.empty((batch, steps, hidden))
        self.r = np.empty((batch, steps, hidden))
        self.c = np.empty((batch, steps, hidden))
        self.h_prev = np.empty((batch, steps, hidden))
        out = np.empty((batch, steps, hidden))
        h = np.zeros((batch, hidden))
        for t in range(steps):
            z = _sigmoid(xz[:, t] + h @ u_z)
            r = _sigmoid(xr[:, t] + h @ u_r)
            c = np.tanh(xh[:, t] + (r * h) @ u_h)
            self.h_prev[:, t] = h
            self.z[:, t], self.r[:, t], self.c[:, t] = z, r, c
            h = (1.0 - z) * h + z * c
            out[:, t] = h
        return out

    def backward(self, grad):
        w_z, w_r, w_h, u_z, u_r, u_h = self.weights
        batch, steps, in_dim = self.x.shape
        hidden = u_z.shape[0]

        d_az = np.empty((batch, steps, hidden))
        d_ar = np.empty((batch, steps, hidden))
        d_ah = np.empty((batch, steps, hidden))
        g_uz = np.zeros_like(u_z)
        g_ur = np.zeros_like(u_r)
        g_uh = np.zeros_like(u_h)

        d_next = np.zeros((batch, hidden))
        for t in reversed(range(steps)):
            z, r, c, h_prev = self.z[:, t], self.r[:, t], self.c[:, t], self.h_prev[:, t]
            dh = grad[:, t] + d_next

            dz = dh * (c - h_prev)
            dc = dh * z
            d_h_prev = dh * (1.0 - z)

            dah = dc * (1.0 - c * c)
            rh = r * h_prev
            g_uh += rh.T @ dah
            d_rh = dah @ u_h.T
            dr = d_rh * h_prev
            d_h_prev += d_rh * r

            dar = dr * r * (1.0 - r)
            daz = dz * z * (1.0 - z)
            g_ur += h_prev.T @ dar
            g_uz += h_prev.T @ daz
            d_h_prev += dar @ u_r.T + daz @ u_z.T

            d_az[:, t], d_ar[:, t], d_ah[:, t] = daz, dar, dah
            d_next = d_h_prev

        flat_x = self.x.reshape(batch * steps, in_dim)
        flat_z = d_az.reshape(batch * steps, hidden)
        flat_r = d_ar.reshape(batch * steps, hidden)
        flat_h = d_ah.reshape(batch * steps, hidden)
        grad_x = (flat_z @ w_z.T + flat_r @ w_r.T + flat_h @ w_h.T).reshape(batch, steps, in_dim)
        return (
            grad_x,
            flat_x.T @ flat_z, flat_x.T @ flat_r, flat_x.T @ flat_h,
            g_uz, g_ur, g_uh,
            flat_z.sum(axis=0), flat_r.sum(axis=0), flat_h.sum(axis=0),
        )


def gru_sequence(
    x: Tensor,
    w_z: Tensor, w_r: Tensor, w_h: Tensor,
    u_z: Tensor, u_r: Tensor, u_h: Tensor,
    b_z: Tensor, b_r: Tensor, b_h: Tensor,
) -> Tensor:
    return GRUSequence.apply(x, w_z, w_r, w_h, u_z, u_r, u_h, b_z, b_r, b_h)
