"""Byte-stable structured text: sorted keys, 17 significant digits, SHA-256 digests."""
from __future__ import annotations
from typing import Any, Union
from typing_extensions import Final

import hashlib
import json
import math
import os
from collections.abc import Mapping

import numpy as np

FLOAT_FORMAT: Final = '.17g'
INDENT: Final = '  '


def _format_float(value: float) -> str:
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    text = format(value, FLOAT_FORMAT)
    if text in ('0', '-0'):
        return '0.0'
    if all(c not in text for c in '.en'):
        text += '.0'
    return text


def _plain(obj: Any) -> Any:
    if isinstance(obj, np.ndarray):
        return [_plain(x) for x in obj.tolist()]
    if isinstance(obj, np.generic):
        return obj.item()
    if hasattr(obj, 'to_dict'):
        return obj.to_dict()
    return obj


def _dump(obj: Any, depth: int, out: list[str]):
    obj = _plain(obj)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, Mapping):
        if not obj:
            out.append('{}')
            return
        pad = INDENT * (depth + 1)
        out.append('{\n')
        items = sorted(((str(k), v) for k, v in obj.items()), key=lambda kv: kv[0])
        for i, (key, value) in enumerate(items):
            out.append(f'{pad}{json.dumps(key, ensure_ascii=False)}: ')
            _dump(value, depth + 1, out)
            out.append(',\n' if i + 1 < len(items) else '\n')
        out.append(INDENT * depth + '}')
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append('[]')
            return
        # short numeric vectors stay on one line so vertex arrays remain readable
        if len(obj) <= 4 and all(isinstance(_plain(x), (int, float)) and not isinstance(x, bool) for x in obj):
            parts: list[str] = []
            for x in obj:
                _dump(x, depth + 1, parts)
            out.append('[' + ', '.join(parts) + ']')
            return
        pad = INDENT * (depth + 1)
        out.append('[\n')
        for i, value in enumerate(obj):
            out.append(pad)
            _dump(value, depth + 1, out)
            out.append(',\n' if i + 1 < len(obj) else '\n')
        out.append(INDENT * depth + ']')
    else:
        raise TypeError(f'Object of type {type(obj).__name__} is not serializable')


def dumps_stable(obj: Any) -> str:
    out: list[str] = []
    _dump(obj, 0, out)
    out.append('\n')
    return ''.join(out)


def loads(text: str) -> Any:
    def _special(value):
        return {'nan': math.nan, 'inf': math.inf, '-inf': -math.inf}.get(value, value)

    return json.loads(text, object_hook=lambda d: {k: _special(v) if isinstance(v, str) else v for k, v in d.items()})


def write_stable(path: Union[str, os.PathLike], obj: Any) -> str:
    """Write ``obj`` byte-stably and return the SHA-256 digest of the written bytes."""
    data = dumps_stable(obj).encode('utf-8')
    directory = os.path.dirname(os.fspath(path))
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'wb') as f:
        f.write(data)
    return hashlib.sha256(data).hexdigest()


def read_structured(path: Union[str, os.PathLike]) -> Any:
    with open(path, 'r', encoding='utf-8') as f:
        return loads(f.read())


def file_digest(path: Union[str, os.PathLike]) -> str:
    sha = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            sha.update(chunk)
    return sha.hexdigest()


def array_digest(*arrays: np.ndarray) -> str:
    sha = hashlib.sha256()
    for array in arrays:
        array = np.ascontiguousarray(array)
        sha.update(str(array.dtype).encode())
        sha.update(str(array.shape).encode())
        sha.update(array.tobytes())
    return sha.hexdigest()
