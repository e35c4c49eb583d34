"""
FermiSplit - Report Writers
Deterministic JSON and CSV text for reports, written atomically
"""

import csv
import io
import json
import math
import os
import tempfile
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

FERMI_CSV_HEADER = ('k1', 'k2', 'absD', 'log10absD')


def format_float(x: float) -> str:
    """17 significant digits; non-finite values become JSON strings"""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == 0.0:
        return "0"
    return f"{x:.17g}"


def _plain(value: Any) -> Any:
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, tuple):
        return list(value)
    return value


def to_json_text(value: Any, indent: int = 2) -> str:
    """
    Serialize a report with sorted keys and fixed number formatting

    Complex numbers become {"im": ..., "re": ...}. Objects with to_dict() are
    serialized through it.
    """
    def render(item: Any, level: int) -> str:
        item = _plain(item)
        pad, inner = " " * (indent * level), " " * (indent * (level + 1))
        if item is None:
            return "null"
        if isinstance(item, bool):
            return "true" if item else "false"
        if isinstance(item, int):
            return str(item)
        if isinstance(item, float):
            return format_float(item)
        if isinstance(item, complex):
            return render({'re': item.real, 'im': item.imag}, level)
        if isinstance(item, str):
            return json.dumps(item)
        if isinstance(item, dict):
            if not item:
                return "{}"
            body = [f"{inner}{json.dumps(str(k))}: {render(item[k], level + 1)}"
                    for k in sorted(item, key=str)]
            return "{\n" + ",\n".join(body) + "\n" + pad + "}"
        if isinstance(item, list):
            if not item:
                return "[]"
            body = [inner + render(v, level + 1) for v in item]
            return "[\n" + ",\n".join(body) + "\n" + pad + "]"
        raise TypeError(f"cannot serialize {type(item).__name__}")

    return render(value, 0) + "\n"


def fermi_csv_text(rows: Iterable[Sequence[float]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(FERMI_CSV_HEADER)
    for row in rows:
        writer.writerow([format_float(x).strip('"') for x in row])
    return buffer.getvalue()


def write_text_atomic(path: str, text: str):
    """Write text to path through a temporary file in the same directory"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp_', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise


def write_json_report(path: str, report: Any):
    write_text_atomic(path, to_json_text(report))


def sweep_summary(entries: List[Dict], residual_key: Optional[str] = None,
                  verdict_key: Optional[str] = None) -> Dict:
    """
    Summary block of a sweep report

    Args:
        entries: Per-lambda entries with a 'status' field and an optional 'report'
        residual_key: Report field whose maximum is reported
        verdict_key: Boolean report field counted as true/false verdicts

    Returns:
        count, skipped, errors, max_residual and verdict counts
    """
    done = [e['report'] for e in entries if e['status'] == 'ok']
    summary: Dict[str, Any] = {
        'count': len(entries),
        'skipped': sum(1 for e in entries if e['status'] == 'skipped'),
        'errors': sum(1 for e in entries if e['status'] == 'error'),
    }
    if residual_key:
        residuals = [float(r[residual_key]) for r in done if r.get(residual_key) is not None]
        summary['max_residual'] = max(residuals) if residuals else None
    if verdict_key:
        verdicts = {'true': 0, 'false': 0}
        for r in done:
            verdicts['true' if r.get(verdict_key) else 'false'] += 1
        summary['verdicts'] = verdicts
    return summary
