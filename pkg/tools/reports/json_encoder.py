import json
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np


class CustomJSONEncoder(json.JSONEncoder):
    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if is_dataclass(obj) and not isinstance(obj, type):
            return asdict(obj)
        if isinstance(obj, Path):
            return str(obj)
        try:
            return dict(obj)
        except (TypeError, ValueError):
            return str(obj)


def dumps(data, indent: int = 2) -> str:
    return json.dumps(data, indent=indent, cls=CustomJSONEncoder) + "\n"
