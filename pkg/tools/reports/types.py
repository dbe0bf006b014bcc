from typing import Dict, List, Optional, TypedDict


class ProfileCsvRow(TypedDict):
    name: str
    params: int
    flops: int


class AblationCsvRow(TypedDict):
    variant: str
    params: int
    acc: float
    auc: Optional[float]
    f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    tn: int
    fn: int


class MetricsRecord(TypedDict):
    acc: float
    auc: Optional[float]
    f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    tn: int
    fn: int


class GradCheckRecord(TypedDict):
    passed: bool
    tolerance: float
    checks: Dict[str, float]
    failed: List[str]
