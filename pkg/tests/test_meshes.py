import numpy as np
import pytest

from formfunc.meshes import OffFormatError, TriMesh, parse_off, write_obj

MINIMAL = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"

CUBE_OFF = """OFF
8 6 12
0 0 0
1 0 0
1 1 0
0 1 0
0 0 1
1 0 1
1 1 1
0 1 1
4 0 1 2 3
4 7 6 5 4
4 0 4 5 1
4 1 5 6 2
4 2 6 7 3
4 3 7 4 0
"""


def fan_triangulate(face):
    """Oracle: split a polygon into triangles fanning from its first vertex."""
    return [(face[0], face[k], face[k + 1]) for k in range(1, len(face) - 1)]


def test_minimal_document():
    mesh = parse_off(MINIMAL)
    assert len(mesh.vertices) == 3
    assert len(mesh.triangles) == 1
    assert tuple(mesh.triangles[0]) == (0, 1, 2)


def test_bad_header_reports_line():
    with pytest.raises(OffFormatError, match="line 1"):
        parse_off("OOF\n3 1 0\n")


def test_cube_quads_fan_triangulated():
    mesh = parse_off(CUBE_OFF)
    assert len(mesh.vertices) == 8
    assert len(mesh.triangles) == 12
    expected = []
    for face in [
        (0, 1, 2, 3), (7, 6, 5, 4), (0, 4, 5, 1),
        (1, 5, 6, 2), (2, 6, 7, 3), (3, 7, 4, 0),
    ]:
        expected.extend(fan_triangulate(face))
    assert [tuple(t) for t in mesh.triangles] == expected


def test_count_mismatch_reports_line():
    doc = "OFF\n4 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"
    with pytest.raises(OffFormatError):
        parse_off(doc)


def test_index_out_of_range_reports_line():
    doc = "OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 9\n"
    with pytest.raises(OffFormatError, match="line 6"):
        parse_off(doc)


def test_comments_and_blank_lines_skipped():
    doc = "# comment\nOFF\n\n3 1 0  # counts\n0 0 0\n1 0 0\n0 1 0\n\n3 0 1 2\n"
    mesh = parse_off(doc)
    assert len(mesh.triangles) == 1


def test_single_line_off_header_variant():
    doc = "OFF 3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n"
    assert len(parse_off(doc).triangles) == 1


def test_trimesh_invariants_enforced():
    with pytest.raises(ValueError):
        TriMesh(np.zeros((2, 3)), [[0, 1, 2]])
    with pytest.raises(ValueError):
        TriMesh(np.zeros((3, 3)), [[0, 1, 1]])


def test_obj_round_trip_structure():
    mesh = parse_off(CUBE_OFF)
    text = write_obj(mesh)
    v_lines = [l for l in text.splitlines() if l.startswith("v ")]
    f_lines = [l for l in text.splitlines() if l.startswith("f ")]
    assert len(v_lines) == 8
    assert len(f_lines) == 12
    first = f_lines[0].split()[1:]
    assert min(int(i) for line in f_lines for i in line.split()[1:]) == 1
    assert first == ["1", "2", "3"]
