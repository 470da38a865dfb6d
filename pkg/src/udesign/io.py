"""File formats: design JSON, search logs and tomography reports.

All numeric output is serialized with 17 significant digits, which
round-trips IEEE-754 doubles exactly and makes repeated runs byte-identical.
Matrices are stored row-major as nested lists of [re, im] pairs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .designs import WeightedUnitarySet, assert_phase_distinct
from .errors import InvalidInputError
from .povm import TomographyReport

REPORT_FIELDS = ('class', 'd', 'N', 'trials', 'empirical_mean', 'std_err',
                 'predicted', 'purity', 'seed')


def _fmt_float(x: float) -> str:
    if x != x or x in (float('inf'), float('-inf')):
        raise InvalidInputError("non-finite number in output")
    return format(float(x), '.17g')


def dumps(obj, indent: int = 0, compact: bool = False) -> str:
    """Deterministic JSON text with fixed float formatting.

    Supports the small vocabulary used by the file formats: dict (insertion
    order preserved), list, str, bool, None, int and float.  ``compact``
    renders everything on one line (JSON-lines records).
    """
    pad = ' ' * indent
    if isinstance(obj, dict):
        if not obj:
            return '{}'
        if compact:
            items = ', '.join(f'{json.dumps(k)}: {dumps(v, compact=True)}' for k, v in obj.items())
            return '{' + items + '}'
        items = ',\n'.join(f'{pad}  {json.dumps(k)}: {dumps(v, indent + 2)}' for k, v in obj.items())
        return '{\n' + items + '\n' + pad + '}'
    if isinstance(obj, (list, tuple)):
        if not obj:
            return '[]'
        flat = compact or all(not isinstance(v, (dict, list, tuple)) for v in obj)
        if flat:
            return '[' + ', '.join(dumps(v, compact=compact) for v in obj) + ']'
        items = ',\n'.join(f'{pad}  {dumps(v, indent + 2)}' for v in obj)
        return '[\n' + items + '\n' + pad + ']'
    if isinstance(obj, bool):
        return 'true' if obj else 'false'
    if obj is None:
        return 'null'
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    raise InvalidInputError(f"cannot serialize {type(obj).__name__}")


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(np.real(e)), float(np.imag(e))] for e in row] for row in np.asarray(m)]


def matrix_from_json(rows, context: str = 'matrix') -> np.ndarray:
    try:
        arr = np.array([[complex(e[0], e[1]) for e in row] for row in rows])
    except (TypeError, IndexError, ValueError) as exc:
        raise InvalidInputError(f"{context}: entries must be [re, im] pairs") from exc
    if arr.ndim != 2:
        raise InvalidInputError(f"{context}: expected a 2-d matrix")
    return arr


def design_to_json(s: WeightedUnitarySet, certified_t: int | None = None) -> dict:
    doc: dict = {'dim': int(s.dim)}
    if certified_t is not None:
        doc['certified_t'] = int(certified_t)
    doc['elements'] = [
        {'weight': float(w), 'matrix': matrix_to_json(u)}
        for w, u in zip(s.weights, s.unitaries)
    ]
    return doc


def design_from_json(doc: dict) -> tuple[WeightedUnitarySet, int | None]:
    """Parse and validate a design document; returns (set, certified_t)."""
    if not isinstance(doc, dict):
        raise InvalidInputError("design file must hold a JSON object")
    for field in ('dim', 'elements'):
        if field not in doc:
            raise InvalidInputError(f"design file is missing the {field!r} field")
    dim = doc['dim']
    if not isinstance(dim, int) or dim < 2:
        raise InvalidInputError(f"'dim' must be an integer >= 2, got {dim!r}")
    elements = doc['elements']
    if not isinstance(elements, list) or not elements:
        raise InvalidInputError("'elements' must be a non-empty list")
    weights = []
    unitaries = []
    for i, entry in enumerate(elements):
        if not isinstance(entry, dict) or 'weight' not in entry or 'matrix' not in entry:
            raise InvalidInputError(f"element {i}: need 'weight' and 'matrix' fields")
        weights.append(float(entry['weight']))
        u = matrix_from_json(entry['matrix'], context=f"element {i}")
        if u.shape != (dim, dim):
            raise InvalidInputError(f"element {i}: matrix shape {u.shape} does not match dim={dim}")
        unitaries.append(u)
    weights = np.asarray(weights)
    if abs(weights.sum() - 1.0) > 1e-6:
        raise InvalidInputError(f"weights sum to {weights.sum():.9f}, expected 1 within 1e-6")
    weights = weights / weights.sum()
    s = WeightedUnitarySet(dim, np.array(unitaries), weights)
    assert_phase_distinct(s)
    certified_t = doc.get('certified_t')
    if certified_t is not None and (not isinstance(certified_t, int) or certified_t < 1):
        raise InvalidInputError(f"'certified_t' must be a positive integer, got {certified_t!r}")
    return s, certified_t


def save_design(s: WeightedUnitarySet, path, certified_t: int | None = None) -> None:
    Path(path).write_text(dumps(design_to_json(s, certified_t)) + '\n')


def load_design(path) -> tuple[WeightedUnitarySet, int | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InvalidInputError(f"cannot read design file {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(
            f"design file {path} is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
        ) from exc
    return design_from_json(doc)


def write_search_log(path, gap_history) -> None:
    """JSON-lines sidecar: one {iteration, gap} record per iteration."""
    lines = [dumps({'iteration': int(i), 'gap': float(g)}, compact=True)
             for i, g in enumerate(np.asarray(gap_history, dtype=float))]
    Path(path).write_text('\n'.join(lines) + ('\n' if lines else ''))


def report_row(report: TomographyReport) -> dict:
    return {
        'class': report.state_class,
        'd': int(report.dim),
        'N': int(report.shots),
        'trials': int(report.trials),
        'empirical_mean': float(report.empirical_mean),
        'std_err': float(report.std_err),
        'predicted': float(report.predicted),
        'purity': float(report.purity),
        'seed': int(report.seed) if report.seed is not None else 0,
    }


def _csv_cell(v) -> str:
    return _fmt_float(v) if isinstance(v, float) else str(v)


def write_report(csv_path, reports: list[TomographyReport]) -> Path:
    """Write the CSV report plus its JSON mirror; returns the mirror path."""
    csv_path = Path(csv_path)
    rows = [report_row(r) for r in reports]
    lines = [','.join(REPORT_FIELDS)]
    lines += [','.join(_csv_cell(row[f]) for f in REPORT_FIELDS) for row in rows]
    csv_path.write_text('\n'.join(lines) + '\n')
    mirror = csv_path.with_suffix('.json') if csv_path.suffix == '.csv' \
        else csv_path.with_name(csv_path.name + '.json')
    mirror.write_text(dumps(rows) + '\n')
    return mirror
