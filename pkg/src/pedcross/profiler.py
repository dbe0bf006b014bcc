"""
Analytic cost accounting.

Parameter counts come from the config alone, so they act as an independent
check on what the built model allocates. FLOPS conventions:
    conv     2 * K * C * kh * kw * H_out * W_out
    dense    2 * in * out + out
    GRU      3 * (2 * in * h + 2 * h^2 + 3 * h) per step
    anything else element-wise: 1 per scalar op
Weight memory is 4 bytes per parameter.
"""
import logging
from typing import List, Tuple, Union

from .constants import (
    BYTES_PER_PARAM, KERNEL_SIZE, POOL_WINDOW, SEQUENCE_STREAMS, SPATIAL_KERNEL, STREAM_PSEUDO_IMAGE,
)
from .layers.params import reduced_width
from .models import ModelConfig, ProfileReport, ProfileRow
from .network import CrossingNet, stream_input_size

logger = logging.getLogger(__name__)

PARAM_RANGE = (750_000, 3_000_000)


def conv_params(c_in: int, k: int, kh: int = KERNEL_SIZE, kw: int = KERNEL_SIZE) -> int:
    return k * c_in * kh * kw + k


def conv_flops(c_in: int, k: int, h: int, w: int, kh: int = KERNEL_SIZE, kw: int = KERNEL_SIZE) -> int:
    return 2 * k * c_in * kh * kw * h * w


def dense_params(n_in: int, n_out: int) -> int:
    return n_in * n_out + n_out


def dense_flops(n_in: int, n_out: int) -> int:
    return 2 * n_in * n_out + n_out


def gru_params(n_in: int, hidden: int) -> int:
    return 3 * (n_in * hidden + hidden * hidden + hidden)


def gru_flops(n_in: int, hidden: int, steps: int) -> int:
    return steps * 3 * (2 * n_in * hidden + 2 * hidden * hidden + 3 * hidden)


def cbam_params(c: int) -> int:
    r = reduced_width(c)
    return dense_params(c, r) + dense_params(r, c) + conv_params(2, 1, SPATIAL_KERNEL, SPATIAL_KERNEL)


def cbam_flops(c: int, h: int, w: int) -> int:
    r = reduced_width(c)
    volume = c * h * w
    mlp = dense_flops(c, r) + r + dense_flops(r, c)
    channel = 2 * volume + 2 * mlp + 2 * c + volume
    spatial = 2 * volume + conv_flops(2, 1, h, w, SPATIAL_KERNEL, SPATIAL_KERNEL) + h * w + volume
    return channel + spatial


def se_params(c: int) -> int:
    r = reduced_width(c)
    return dense_params(c, r) + dense_params(r, c)


def se_flops(c: int, h: int, w: int) -> int:
    r = reduced_width(c)
    return 2 * c * h * w + dense_flops(c, r) + r + dense_flops(r, c) + c


def temporal_attention_params(hidden: int, width: int) -> int:
    return 2 * hidden * width + width + width


def temporal_attention_flops(hidden: int, width: int, steps: int) -> int:
    projections = steps * 2 * hidden * width + 2 * hidden * width
    energy = 2 * steps * width + steps * width
    scores = steps * 2 * width
    return projections + energy + scores + 3 * steps + 2 * steps * hidden


def modality_attention_params(hidden: int, width: int) -> int:
    return hidden * width + width + width


def modality_attention_flops(hidden: int, width: int, count: int) -> int:
    return count * (2 * hidden * width + 2 * width + 2 * width) + 3 * count + 2 * count * hidden


def _branch_rows(config: ModelConfig) -> List[ProfileRow]:
    rows: List[ProfileRow] = []
    k = config.feature_maps
    for b, _ in enumerate(config.branches):
        c_in, h, w = config.coord_dim, config.frames, config.joints
        for s in range(config.blocks_per_branch):
            prefix = f"branch{b}.stage{s}"
            rows.append(ProfileRow(f"{prefix}.conv", conv_params(c_in, k), conv_flops(c_in, k, h, w)))
            rows.append(ProfileRow(f"{prefix}.leaky_relu", 0, k * h * w))
            if config.attention_kind == "cbam":
                rows.append(ProfileRow(f"{prefix}.cbam", cbam_params(k), cbam_flops(k, h, w)))
            elif config.attention_kind == "se":
                rows.append(ProfileRow(f"{prefix}.se", se_params(k), se_flops(k, h, w)))
            rows.append(ProfileRow(f"{prefix}.bn", 2 * k, 4 * k * h * w))
            h, w = h // POOL_WINDOW, w // POOL_WINDOW
            rows.append(ProfileRow(f"{prefix}.pool", 0, (POOL_WINDOW * POOL_WINDOW - 1) * k * h * w))
            c_in = k
        rows.append(ProfileRow(f"branch{b}.gap", 0, k * h * w))
    if len(config.branches) > 1:
        rows.append(ProfileRow("branch_sum", 0, (len(config.branches) - 1) * k))
    return rows


def _stream_rows(config: ModelConfig, stream: str) -> List[ProfileRow]:
    rows: List[ProfileRow] = []
    h, steps = config.hidden, config.frames
    n_in = stream_input_size(config, stream)
    for b in range(config.recurrent_blocks_per_stream):
        prefix = f"{stream}.block{b}"
        if config.recurrent_kind == "ugru":
            rows.append(ProfileRow(f"{prefix}.reverse", gru_params(n_in, h), gru_flops(n_in, h, steps)))
            rows.append(ProfileRow(f"{prefix}.forward", gru_params(n_in + h, h), gru_flops(n_in + h, h, steps)))
        elif config.recurrent_kind == "bigru":
            rows.append(ProfileRow(f"{prefix}.forward", gru_params(n_in, h), gru_flops(n_in, h, steps)))
            rows.append(ProfileRow(f"{prefix}.reverse", gru_params(n_in, h), gru_flops(n_in, h, steps)))
            rows.append(ProfileRow(f"{prefix}.merge", 0, steps * h))
        else:
            rows.append(ProfileRow(f"{prefix}.forward", gru_params(n_in, h), gru_flops(n_in, h, steps)))
        n_in = h
    rows.append(ProfileRow(f"{stream}.attention", temporal_attention_params(h, h), temporal_attention_flops(h, h, steps)))
    return rows


def profile_config(config: ModelConfig, additional_cost_params: int = 0) -> ProfileReport:
    config.check()
    rows: List[ProfileRow] = []
    count = 0
    if config.has_stream(STREAM_PSEUDO_IMAGE):
        rows.extend(_branch_rows(config))
        count += 1
    for stream in SEQUENCE_STREAMS:
        if config.has_stream(stream):
            rows.extend(_stream_rows(config, stream))
            count += 1
    h = config.hidden
    rows.append(ProfileRow("fusion", modality_attention_params(h, h), modality_attention_flops(h, h, count)))
    rows.append(ProfileRow("head", dense_params(h, 1), dense_flops(h, 1)))
    rows.append(ProfileRow("head.sigmoid", 0, 1))
    return ProfileReport.from_rows(rows, additional_cost_params=additional_cost_params)


def profile(target: Union[CrossingNet, ModelConfig], additional_cost_params: int = 0) -> ProfileReport:
    config = target.config if isinstance(target, CrossingNet) else target
    report = profile_config(config, additional_cost_params)
    if isinstance(target, CrossingNet) and target.param_count() != report.total_params:
        logger.error(f"Model allocates {target.param_count()} parameters, analytic count is {report.total_params}")
    log_anchor_comparison(report)
    return report


def param_count(model: CrossingNet) -> int:
    return model.param_count()


def flops_count(target: Union[CrossingNet, ModelConfig]) -> int:
    config = target.config if isinstance(target, CrossingNet) else target
    return profile_config(config).total_flops


def memory_estimate(target: Union[CrossingNet, ModelConfig]) -> int:
    if isinstance(target, CrossingNet):
        return target.param_count() * BYTES_PER_PARAM
    return profile_config(target).weight_bytes


def largest_rows(report: ProfileReport, n: int = 5) -> List[ProfileRow]:
    return sorted(report.rows, key=lambda r: (-r.params, r.name))[:n]


def delta_breakdown(report: ProfileReport) -> List[Tuple[ProfileRow, float, float]]:
    """Every row, largest first, with its share of the total and of |total - anchor|"""
    gap = abs(report.params_delta)
    return [
        (
            row,
            row.params / report.total_params if report.total_params else 0.0,
            row.params / gap if gap else 0.0,
        )
        for row in largest_rows(report, n=len(report.rows))
    ]


def log_anchor_comparison(report: ProfileReport) -> None:
    """Report totals against the published figures; nothing here is pass/fail"""
    delta = report.params_delta
    logger.info(
        f"Parameters: {report.total_params:,} (anchor ~{report.anchor_params:,}, delta {delta:+,}); "
        f"FLOPS: {report.total_flops:,} (anchor {report.anchor_flops:,}); "
        f"weights: {report.weight_bytes / 1e6:.2f} MB (anchor {report.anchor_weight_mb} MB)"
    )
    if report.additional_cost_params:
        logger.info(f"Parameters with additional costs: {report.params_with_additional_costs:,}")
    low, high = PARAM_RANGE
    if not low <= report.total_params <= high:
        logger.warning(f"Parameter total {report.total_params:,} lies outside [{low:,}, {high:,}]")
    for row, of_total, of_delta in delta_breakdown(report):
        logger.info(f"  {row.name}: {row.params:,} params ({of_total:.1%} of total, {of_delta:.1%} of delta)")
