"""Dataset manifests: which meshes, which classes, which ids.

A manifest is a small CSV with rows path,class,id. Paths are resolved
relative to the manifest file so a dataset directory can be moved as a
unit.
"""

import csv
import os
from dataclasses import dataclass

from .operators import DEFAULT_EPSILON


class ManifestError(Exception):
    """Malformed or inconsistent manifest."""


@dataclass
class ManifestEntry:
    path: str
    label: str
    shape_id: str


@dataclass
class Manifest:
    """Entries plus the run parameters they will be processed under."""

    entries: list
    n: int = 7
    m: int = 7
    epsilon: object = DEFAULT_EPSILON
    seed: int = 0
    source_path: str = ""

    @property
    def shape_ids(self):
        return [e.shape_id for e in self.entries]

    @property
    def labels(self):
        return [e.label for e in self.entries]

    @property
    def class_names(self):
        return sorted(set(self.labels))

    def entry(self, shape_id):
        for e in self.entries:
            if e.shape_id == shape_id:
                return e
        raise ManifestError(f"no shape with id {shape_id!r} in manifest")


def load_manifest(path, n=7, m=7, epsilon=DEFAULT_EPSILON, seed=0,
                  check_files=True):
    """Read and validate a manifest CSV.

    Parameters
    ----------
    path : str
    n, m, epsilon, seed
        Run parameters attached to the result.
    check_files : bool
        Verify every referenced mesh file exists.

    Returns
    -------
    Manifest

    Raises
    ------
    ManifestError
        On malformed rows, duplicate ids, or missing files.
    """
    base = os.path.dirname(os.path.abspath(path))
    entries = []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ManifestError(f"cannot open manifest: {exc}") from exc
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if row[0].lstrip().startswith("#"):
                continue
            cells = [cell.strip() for cell in row]
            if lineno == 1 and [c.lower() for c in cells[:3]] == ["path", "class", "id"]:
                continue
            if len(cells) != 3:
                raise ManifestError(
                    f"{path}:{lineno}: expected path,class,id "
                    f"(got {len(cells)} fields)")
            mesh_path, label, shape_id = cells
            if not shape_id:
                raise ManifestError(f"{path}:{lineno}: empty shape id")
            if not os.path.isabs(mesh_path):
                mesh_path = os.path.join(base, mesh_path)
            entries.append(ManifestEntry(mesh_path, label, shape_id))
    if not entries:
        raise ManifestError(f"{path}: manifest lists no shapes")
    seen = set()
    for e in entries:
        if e.shape_id in seen:
            raise ManifestError(f"{path}: duplicate shape id {e.shape_id!r}")
        seen.add(e.shape_id)
    if check_files:
        for e in entries:
            if not os.path.isfile(e.path):
                raise ManifestError(
                    f"{path}: mesh file not found for {e.shape_id!r}: {e.path}")
    return Manifest(entries=entries, n=n, m=m, epsilon=epsilon, seed=seed,
                    source_path=os.path.abspath(path))


def write_manifest(entries, path):
    """Write rows of (path, class, id) with the standard header."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "class", "id"])
        for e in entries:
            if isinstance(e, ManifestEntry):
                writer.writerow([e.path, e.label, e.shape_id])
            else:
                writer.writerow(list(e))
