from typing import Literal, TypeAlias

# Input streams as literals
STREAM_PSEUDO_IMAGE: Literal["pseudo_image"] = "pseudo_image"
STREAM_JCD: Literal["jcd"] = "jcd"
STREAM_BBOX: Literal["bbox"] = "bbox"
STREAM_SPEED: Literal["speed"] = "speed"

StreamName: TypeAlias = Literal["pseudo_image", "jcd", "bbox", "speed"]

# Fusion order of the modality vectors
ALL_STREAMS = (STREAM_PSEUDO_IMAGE, STREAM_JCD, STREAM_BBOX, STREAM_SPEED)
SEQUENCE_STREAMS = (STREAM_JCD, STREAM_BBOX, STREAM_SPEED)

AttentionKind: TypeAlias = Literal["cbam", "se", "none"]
RecurrentKind: TypeAlias = Literal["ugru", "bigru", "gru"]
BlockOrder: TypeAlias = Literal["cbam_then_bn", "bn_then_cbam"]
Mode: TypeAlias = Literal["train", "eval"]

ATTENTION_KINDS = ("cbam", "se", "none")
RECURRENT_KINDS = ("ugru", "bigru", "gru")
BLOCK_ORDERS = ("cbam_then_bn", "bn_then_cbam")

# Pose layout
OBSERVATION_FRAMES = 16
NUM_JOINTS = 18
COORD_DIM = 2
BBOX_DIM = 4

# Layer hyper-parameters
FEATURE_MAPS = 64
HIDDEN_UNITS = 64
KERNEL_SIZE = 3
SPATIAL_KERNEL = 7
ATTENTION_REDUCTION = 16
LEAKY_SLOPE = 0.2
BN_EPSILON = 1e-5
BN_MOMENTUM = 0.9
POOL_WINDOW = 2

# Optimizer
BETA1 = 0.9
BETA2 = 0.999
ADAM_EPSILON = 1e-8
LOOKAHEAD_K = 6
LOOKAHEAD_ALPHA = 0.5
RADAM_RHO_THRESHOLD = 4.0

# Loss
PROB_CLAMP = 1e-7
DECISION_THRESHOLD = 0.5

# Reference figures reported for the published model
ANCHOR_PARAMS = 1_500_000
ANCHOR_FLOPS = 3_000_000
ANCHOR_WEIGHT_MB = 5.4
BYTES_PER_PARAM = 4

CHECKPOINT_MAGIC = b"PEDCROSS-CKPT"
CHECKPOINT_VERSION = 1
LOG_LEVEL_ENV = "PEDCROSS_LOG_LEVEL"
