"""Mesh file readers and writers.

Supported formats: ASCII OFF, and PLY in ascii or binary_little_endian
encodings with float32/float64 vertex coordinates and list-typed triangle
faces. Parse failures raise :class:`~sfmap.errors.MeshParseError` carrying the
path and line (or byte offset).
"""

import os
import struct

import numpy as np

from .errors import MeshParseError
from .trimesh import TriMesh

_PLY_SCALARS = {
    "char": "i1", "int8": "i1",
    "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2",
    "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4",
    "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4",
    "double": "f8", "float64": "f8",
}


def load_mesh(path, format=None, largest_component=False):
    """Read a triangle mesh from OFF or PLY.

    Parameters
    ----------
    path : str or Path
        File to read.
    format : str, optional
        "off" or "ply". Inferred from the extension when omitted.
    largest_component : bool
        Extract the largest connected component instead of rejecting
        disconnected input. Default False.

    Returns
    -------
    TriMesh
        Validated mesh.
    """
    path = os.fspath(path)
    if format is None:
        ext = os.path.splitext(path)[1].lower().lstrip(".")
        format = ext
    format = format.lower()
    if format == "off":
        vertices, faces = _read_off(path)
    elif format == "ply":
        vertices, faces = _read_ply(path)
    else:
        raise MeshParseError(f"unsupported mesh format {format!r}", path=path)
    mesh = TriMesh(vertices, faces, validate=False)
    if largest_component:
        mesh = mesh.largest_component()
    return mesh.validate()


def write_off(mesh, path):
    """Write a mesh as ASCII OFF with 17-significant-digit coordinates."""
    lines = ["OFF", f"{mesh.n_vertices} {mesh.n_faces} 0"]
    for x, y, z in mesh.vertices:
        lines.append(f"{x:.17g} {y:.17g} {z:.17g}")
    for a, b, c in mesh.faces:
        lines.append(f"3 {a} {b} {c}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _off_tokens(path):
    # Yields (lineno, tokens) for content lines; strips comments and blanks.
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield lineno, line.split()


def _read_off(path):
    stream = _off_tokens(path)

    def next_tokens(what):
        try:
            return next(stream)
        except StopIteration:
            raise MeshParseError(f"unexpected end of file, expected {what}",
                                 path=path) from None

    lineno, tokens = next_tokens("OFF header")
    if tokens[0] != "OFF":
        raise MeshParseError("missing OFF header", path=path, line=lineno)
    if len(tokens) > 1:
        counts, lineno_counts = tokens[1:], lineno
    else:
        lineno_counts, counts = next_tokens("vertex/face counts")
    if len(counts) < 2:
        raise MeshParseError("expected vertex and face counts",
                             path=path, line=lineno_counts)
    try:
        nv, nf = int(counts[0]), int(counts[1])
    except ValueError:
        raise MeshParseError(f"bad counts line {' '.join(counts)!r}",
                             path=path, line=lineno_counts) from None

    vertices = np.empty((nv, 3), dtype=np.float64)
    for i in range(nv):
        lineno, tokens = next_tokens(f"vertex {i} of {nv}")
        if len(tokens) < 3:
            raise MeshParseError(f"vertex {i}: expected 3 coordinates",
                                 path=path, line=lineno)
        try:
            vertices[i] = [float(t) for t in tokens[:3]]
        except ValueError:
            raise MeshParseError(f"vertex {i}: bad coordinate",
                                 path=path, line=lineno) from None

    faces = np.empty((nf, 3), dtype=np.int64)
    for i in range(nf):
        lineno, tokens = next_tokens(f"face {i} of {nf}")
        try:
            arity = int(tokens[0])
        except ValueError:
            raise MeshParseError(f"face {i}: bad vertex count",
                                 path=path, line=lineno) from None
        if arity != 3:
            raise MeshParseError(
                f"face {i} has {arity} vertices; only triangles are supported",
                path=path, line=lineno)
        if len(tokens) < 4:
            raise MeshParseError(f"face {i}: expected 3 indices",
                                 path=path, line=lineno)
        try:
            faces[i] = [int(t) for t in tokens[1:4]]
        except ValueError:
            raise MeshParseError(f"face {i}: bad index", path=path,
                                 line=lineno) from None
    return vertices, faces


class _PlyProperty:
    __slots__ = ("name", "dtype", "count_dtype")

    def __init__(self, name, dtype, count_dtype=None):
        self.name = name
        self.dtype = dtype
        self.count_dtype = count_dtype  # set for list properties

    @property
    def is_list(self):
        return self.count_dtype is not None


def _parse_ply_header(fh, path):
    def read_line(lineno):
        raw = fh.readline()
        if not raw:
            raise MeshParseError("unexpected end of header", path=path,
                                 line=lineno)
        return raw.decode("ascii", errors="replace").strip()

    lineno = 1
    if read_line(lineno) != "ply":
        raise MeshParseError("missing ply magic", path=path, line=1)
    encoding = None
    elements = []  # (name, count, [properties])
    while True:
        lineno += 1
        line = read_line(lineno)
        if not line or line.startswith("comment") or line.startswith("obj_info"):
            continue
        tokens = line.split()
        if tokens[0] == "format":
            if tokens[1] not in ("ascii", "binary_little_endian"):
                raise MeshParseError(
                    f"unsupported ply encoding {tokens[1]!r}",
                    path=path, line=lineno)
            encoding = tokens[1]
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise MeshParseError("property before any element",
                                     path=path, line=lineno)
            props = elements[-1][2]
            if tokens[1] == "list":
                count_t, index_t, name = tokens[2], tokens[3], tokens[4]
                for t in (count_t, index_t):
                    if t not in _PLY_SCALARS:
                        raise MeshParseError(f"unknown ply type {t!r}",
                                             path=path, line=lineno)
                props.append(_PlyProperty(name, _PLY_SCALARS[index_t],
                                          _PLY_SCALARS[count_t]))
            else:
                if tokens[1] not in _PLY_SCALARS:
                    raise MeshParseError(f"unknown ply type {tokens[1]!r}",
                                         path=path, line=lineno)
                props.append(_PlyProperty(tokens[2], _PLY_SCALARS[tokens[1]]))
        elif tokens[0] == "end_header":
            break
        else:
            raise MeshParseError(f"unrecognized header line {line!r}",
                                 path=path, line=lineno)
    if encoding is None:
        raise MeshParseError("header missing format line", path=path)
    return encoding, elements, lineno


def _read_ply(path):
    with open(path, "rb") as fh:
        encoding, elements, header_lines = _parse_ply_header(fh, path)
        names = [e[0] for e in elements]
        if "vertex" not in names or "face" not in names:
            raise MeshParseError("ply file must declare vertex and face "
                                 "elements", path=path)
        if encoding == "ascii":
            return _read_ply_ascii(fh, path, elements, header_lines)
        return _read_ply_binary(fh, path, elements)


def _vertex_columns(props, path):
    if any(p.is_list for p in props):
        raise MeshParseError("list-typed vertex properties are not supported",
                             path=path)
    try:
        cols = [[p.name for p in props].index(axis) for axis in "xyz"]
    except ValueError:
        raise MeshParseError("vertex element lacks x/y/z properties",
                             path=path) from None
    return cols


def _face_list_property(props, path):
    lists = [i for i, p in enumerate(props) if p.is_list]
    if len(lists) != 1 or len(props) != 1:
        raise MeshParseError("face element must carry exactly one list "
                             "property", path=path)
    return props[lists[0]]


def _read_ply_ascii(fh, path, elements, lineno):
    vertices = None
    faces = None
    for name, count, props in elements:
        if name == "vertex":
            cols = _vertex_columns(props, path)
            vertices = np.empty((count, 3), dtype=np.float64)
            for i in range(count):
                lineno += 1
                tokens = fh.readline().decode("ascii", errors="replace").split()
                if len(tokens) < len(props):
                    raise MeshParseError(
                        f"vertex {i}: expected {len(props)} values",
                        path=path, line=lineno)
                try:
                    vertices[i] = [float(tokens[c]) for c in cols]
                except ValueError:
                    raise MeshParseError(f"vertex {i}: bad coordinate",
                                         path=path, line=lineno) from None
        elif name == "face":
            _face_list_property(props, path)
            faces = np.empty((count, 3), dtype=np.int64)
            for i in range(count):
                lineno += 1
                tokens = fh.readline().decode("ascii", errors="replace").split()
                if not tokens:
                    raise MeshParseError(f"face {i}: missing line",
                                         path=path, line=lineno)
                arity = int(tokens[0])
                if arity != 3:
                    raise MeshParseError(
                        f"face {i} has {arity} vertices; only triangles are "
                        "supported", path=path, line=lineno)
                faces[i] = [int(t) for t in tokens[1:4]]
        else:
            # Skip unneeded elements line by line.
            for _ in range(count):
                lineno += 1
                fh.readline()
    if vertices is None or faces is None:
        raise MeshParseError("missing vertex or face data", path=path)
    return vertices, faces


def _read_ply_binary(fh, path, elements):
    data = fh.read()
    offset = 0
    vertices = None
    faces = None
    for name, count, props in elements:
        if name == "vertex":
            cols = _vertex_columns(props, path)
            dtype = np.dtype([(p.name, "<" + p.dtype) for p in props])
            end = offset + count * dtype.itemsize
            if end > len(data):
                raise MeshParseError(
                    f"vertex data truncated at byte {len(data)}", path=path)
            rec = np.frombuffer(data[offset:end], dtype=dtype)
            vertices = np.column_stack(
                [rec[props[c].name].astype(np.float64) for c in cols])
            offset = end
        elif name == "face":
            prop = _face_list_property(props, path)
            csize = np.dtype(prop.count_dtype).itemsize
            isize = np.dtype(prop.dtype).itemsize
            rec_dtype = np.dtype([("n", "<" + prop.count_dtype),
                                  ("idx", "<" + prop.dtype, (3,))])
            # Fast path: uniform triangles. Fall back to a walk on mismatch.
            end = offset + count * rec_dtype.itemsize
            uniform = False
            if end <= len(data):
                rec = np.frombuffer(data[offset:end], dtype=rec_dtype)
                uniform = bool((rec["n"] == 3).all())
            if uniform:
                faces = rec["idx"].astype(np.int64)
                offset = end
            else:
                faces = np.empty((count, 3), dtype=np.int64)
                for i in range(count):
                    if offset + csize > len(data):
                        raise MeshParseError(
                            f"face {i}: data truncated at byte {offset}",
                            path=path)
                    (arity,) = struct.unpack_from(
                        "<" + _struct_code(prop.count_dtype), data, offset)
                    offset += csize
                    if arity != 3:
                        raise MeshParseError(
                            f"face {i} has {arity} vertices; only triangles "
                            "are supported", path=path)
                    if offset + 3 * isize > len(data):
                        raise MeshParseError(
                            f"face {i}: data truncated at byte {offset}",
                            path=path)
                    faces[i] = struct.unpack_from(
                        "<3" + _struct_code(prop.dtype), data, offset)
                    offset += 3 * isize
        else:
            if any(p.is_list for p in props):
                raise MeshParseError(
                    f"cannot skip binary element {name!r} with list "
                    "properties", path=path)
            stride = sum(np.dtype(p.dtype).itemsize for p in props)
            offset += count * stride
    if vertices is None or faces is None:
        raise MeshParseError("missing vertex or face data", path=path)
    return vertices, faces


def _struct_code(np_code):
    return {"i1": "b", "u1": "B", "i2": "h", "u2": "H",
            "i4": "i", "u4": "I", "f4": "f", "f8": "d"}[np_code]
