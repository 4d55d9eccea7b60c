"""Raw little-endian float64 field files with JSON sidecars."""
import json
from pathlib import Path
from typing import Any

import numpy as np

from elastoborn.calculus import Direction, Grid, ScalarField, SupportTag, VectorField
from elastoborn.errors import FieldFormatError
from elastoborn.tensors import VOIGT_KEYS, Perturbation, TensorField, column_label

DTYPE = np.dtype('<f8')
FIELD_SUFFIX = '.f64'
METADATA_FILE = 'metadata.json'
VECTOR_SUFFIXES = ('_x1', '_x2', '_x3')


def _sidecar(path: Path) -> Path:
    return path.with_suffix('.json')


def _field_path(path: str | Path) -> Path:
    path = Path(path)
    return path if path.suffix == FIELD_SUFFIX else path.with_name(path.name + FIELD_SUFFIX)


def write_field(f: ScalarField, path: str | Path, name: str | None = None) -> Path:
    """Write `name.f64` plus `name.json`; returns the data path."""
    path = _field_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    f.values.astype(DTYPE, copy=False).tofile(path)
    metadata = {
        'name': name or path.stem,
        'N': f.grid.N,
        'L': f.grid.L,
        'dtype': DTYPE.str,
        'support_tag': str(f.support_tag),
        'upstream': None if f.upstream is None else str(f.upstream),
    }
    with open(_sidecar(path), 'w') as fh:
        json.dump(metadata, fh, indent=2)
    return path


def read_metadata(path: str | Path) -> dict[str, Any]:
    sidecar = _sidecar(_field_path(path))
    try:
        with open(sidecar, 'r') as fh:
            metadata = json.load(fh)
    except FileNotFoundError as e:
        raise FieldFormatError(f'missing sidecar {sidecar}') from e
    except json.JSONDecodeError as e:
        raise FieldFormatError(f'{sidecar}:{e.lineno}:{e.colno}: {e.msg}') from e
    for key in ('N', 'L', 'support_tag'):
        if key not in metadata:
            raise FieldFormatError(f'{sidecar}: missing key {key!r}')
    return metadata


def read_field(path: str | Path, grid: Grid | None = None) -> ScalarField:
    """Read a field and check it against its sidecar and an optional expected grid."""
    path = _field_path(path)
    metadata = read_metadata(path)
    if metadata.get('dtype', DTYPE.str) != DTYPE.str:
        raise FieldFormatError(f'{path}: expected little-endian float64, sidecar says {metadata["dtype"]}')
    declared = Grid(N=metadata['N'], L=metadata['L'])
    if grid is not None and grid != declared:
        raise FieldFormatError(f'{path}: declared grid {declared} does not match {grid}')
    values = np.fromfile(path, dtype=DTYPE)
    if values.size != declared.N**3:
        raise FieldFormatError(f'{path}: expected {declared.N**3} samples for N={declared.N}, found {values.size}')
    upstream = metadata.get('upstream')
    return ScalarField(
        declared,
        values.reshape(declared.shape).astype(np.float64),
        SupportTag(metadata['support_tag']),
        None if upstream is None else Direction.parse(upstream),
    )


def write_vector_field(V: VectorField, path: str | Path) -> list[Path]:
    path = Path(path)
    stem = path.name.removesuffix(FIELD_SUFFIX)
    return [write_field(c, path.with_name(stem + suffix)) for c, suffix in zip(V.components, VECTOR_SUFFIXES)]


def read_vector_field(path: str | Path, grid: Grid | None = None) -> VectorField:
    path = Path(path)
    stem = path.name.removesuffix(FIELD_SUFFIX)
    return VectorField(tuple(read_field(path.with_name(stem + suffix), grid) for suffix in VECTOR_SUFFIXES))


def write_any(f: ScalarField | VectorField, path: str | Path) -> list[Path]:
    if isinstance(f, VectorField):
        return write_vector_field(f, path)
    return [write_field(f, path)]


def write_perturbation(P: Perturbation, directory: str | Path, metadata: dict[str, Any] | None = None) -> Path:
    """21 `cAB.f64` files, `rho.f64` and a bundle `metadata.json`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for index, f in enumerate(P.parameters()):
        write_field(f, directory / column_label(index))
    if P.isotropic is not None:
        write_field(P.isotropic[0], directory / 'lambda')
        write_field(P.isotropic[1], directory / 'mu')
    bundle = {'N': P.grid.N, 'L': P.grid.L, 'isotropic': P.isotropic is not None, **(metadata or {})}
    with open(directory / METADATA_FILE, 'w') as fh:
        json.dump(bundle, fh, indent=2, default=str)
    return directory


def read_perturbation(directory: str | Path) -> Perturbation:
    directory = Path(directory)
    if not (directory / METADATA_FILE).exists():
        raise FieldFormatError(f'{directory} has no {METADATA_FILE}')
    with open(directory / METADATA_FILE, 'r') as fh:
        bundle = json.load(fh)
    grid = Grid(N=bundle['N'], L=bundle['L'])
    components = {key: read_field(directory / column_label(index), grid) for index, key in enumerate(VOIGT_KEYS)}
    rho = read_field(directory / 'rho', grid)
    iso = None
    if bundle.get('isotropic'):
        iso = (read_field(directory / 'lambda', grid), read_field(directory / 'mu', grid))
    return Perturbation(TensorField(components), rho, iso)
