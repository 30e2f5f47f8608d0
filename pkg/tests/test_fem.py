"""Plate model tests: constitutive transforms, element stiffness, assembly,
solves.  Independent oracles: finite-difference path gradients, textbook
transformed-stiffness formulas, a standalone isotropic plane-stress quad, and
eigenvalue counts of the integration rule's zero-energy modes.
"""

import math

import numpy as np
import pytest

from vsuq.errors import ConfigError, DeviationError, DomainError, MeshError
from vsuq.fem import (
    LaminateModel,
    MaterialProps,
    Mesh,
    PathFunction,
    PlyStack,
    fiber_angle,
    hole_plate_mesh,
    model_from_config,
    path_gradient,
    ply_constitutive,
    rect_mesh,
)

PLY_MATERIAL = dict(E_L=137.9, E_T=10.34, nu_LT=0.29, G_LT=6.89, G_TN=3.9,
                      G_LN=6.89)
HOLE_PATHS = [
    [-2.879, 0.527, -0.015, -9.989], [2.879, -0.527, -0.015, -9.989],
    [6.270, -0.656, -1.745, 7.811], [-6.270, 0.656, -1.745, 7.811],
    [7.258, -0.069, 4.087, 17.191], [-7.258, 0.069, 4.087, 17.191],
    [14.227, 2.586, -2.127, 10.519], [-14.227, -2.586, -2.127, 10.519],
]
BEAM_PATHS = [
    [10.61, -0.5563, -0.053, -1.684, 1.015, 1.248, 0.3073, 0.6024],
    [10.61, 0.5563, -0.053, -1.684, 1.015, -1.248, -0.3073, 0.6024],
    [5.402, 1.846, 0.3601, -0.2195, 0.3203, 0.9506, 0.0481, 2.975],
    [5.402, -1.846, 0.3601, -0.2195, 0.3203, -0.9506, -0.0481, 2.975],
]


def demo_material():
    return MaterialProps(**PLY_MATERIAL)


def const_angle_plies(n=4, a1=0.5, thickness=0.0025):
    path = PathFunction("quadratic", (a1, 0.0, 0.0, 0.0))
    return PlyStack((thickness,) * n, (path,) * n)


# ---------------------------------------------------------------------------
# fiber paths
# ---------------------------------------------------------------------------


def test_fiber_angle_along_y_for_pure_x_level_set():
    path = PathFunction("quadratic", (0.0, 0.0, 0.0, 0.0))  # z = x
    assert fiber_angle(path, 0.3, 0.8) == pytest.approx(math.pi / 2, abs=1e-15)


def test_fiber_angle_diagonal_level_set():
    path = PathFunction("quadratic", (1.0, 0.0, 0.0, 0.0))  # z = x + y
    assert fiber_angle(path, 0.2, 0.6) == pytest.approx(-math.pi / 4, abs=1e-15)


def test_fiber_angle_against_fd_gradient_oracle():
    path = PathFunction("quadratic", HOLE_PATHS[0])
    e = 1e-7
    gx = (path.value(0.1 + e, 0.1) - path.value(0.1 - e, 0.1)) / (2 * e)
    gy = (path.value(0.1, 0.1 + e) - path.value(0.1, 0.1 - e)) / (2 * e)
    expected = math.atan2(-gx, gy)
    if expected <= -math.pi / 2:
        expected += math.pi
    assert fiber_angle(path, 0.1, 0.1) == pytest.approx(expected, abs=1e-7)


@pytest.mark.parametrize("kind,coeffs", [("quadratic", c) for c in HOLE_PATHS]
                         + [("cubic", c) for c in BEAM_PATHS])
def test_path_gradient_matches_finite_differences(kind, coeffs, rng):
    path = PathFunction(kind, coeffs)
    pts = rng.uniform(0.05, 0.95, (100, 2))
    e = 1e-6
    gx, gy = path_gradient(path, pts[:, 0], pts[:, 1])
    fgx = (path.value(pts[:, 0] + e, pts[:, 1])
           - path.value(pts[:, 0] - e, pts[:, 1])) / (2 * e)
    fgy = (path.value(pts[:, 0], pts[:, 1] + e)
           - path.value(pts[:, 0], pts[:, 1] - e)) / (2 * e)
    assert np.max(np.abs(gx - fgx) / np.maximum(np.abs(fgx), 1.0)) < 1e-6
    assert np.max(np.abs(gy - fgy) / np.maximum(np.abs(fgy), 1.0)) < 1e-6


def test_degenerate_path_gradient_raises():
    path = PathFunction("quadratic", (0.0, 0.0, -0.5, 0.0))  # grad 0 at x = 1
    with pytest.raises(MeshError, match="degenerate"):
        fiber_angle(path, 1.0, 0.5)


def test_path_validation():
    with pytest.raises(ConfigError):
        PathFunction("quadratic", (1.0, 2.0))
    with pytest.raises(ConfigError):
        PathFunction("quartic", (0.0,) * 4)


# ---------------------------------------------------------------------------
# constitutive transforms
# ---------------------------------------------------------------------------


def test_constitutive_identity_at_zero_angle():
    mat = demo_material()
    dm, db, ds = ply_constitutive(mat, 0.0)
    assert np.array_equal(dm, mat.d_membrane())
    assert np.array_equal(db, mat.d_membrane())
    assert np.array_equal(ds, mat.d_shear())


def test_constitutive_axis_swap_at_ninety_degrees():
    mat = demo_material()
    q11, q12, q22, q66, q44, q55 = mat.q_constants()
    dm, _, ds = ply_constitutive(mat, math.pi / 2)
    assert dm[0, 0] == pytest.approx(q22, rel=1e-14)
    assert dm[1, 1] == pytest.approx(q11, rel=1e-14)
    assert ds[0, 0] == pytest.approx(q55, rel=1e-14)
    assert ds[1, 1] == pytest.approx(q44, rel=1e-14)


def test_constitutive_thirty_degrees_textbook_oracle():
    mat = demo_material()
    q11, q12, q22, q66, q44, q55 = mat.q_constants()
    th = math.radians(30.0)
    c, s = math.cos(th), math.sin(th)
    ref = np.array([
        [q11 * c**4 + 2 * (q12 + 2 * q66) * s * s * c * c + q22 * s**4,
         (q11 + q22 - 4 * q66) * s * s * c * c + q12 * (s**4 + c**4),
         (q11 - q12 - 2 * q66) * s * c**3 + (q12 - q22 + 2 * q66) * s**3 * c],
        [0.0,
         q11 * s**4 + 2 * (q12 + 2 * q66) * s * s * c * c + q22 * c**4,
         (q11 - q12 - 2 * q66) * s**3 * c + (q12 - q22 + 2 * q66) * s * c**3],
        [0.0, 0.0,
         (q11 + q22 - 2 * q12 - 2 * q66) * s * s * c * c + q66 * (s**4 + c**4)],
    ])
    ref = ref + np.triu(ref, 1).T
    dm, _, ds = ply_constitutive(mat, th)
    assert np.max(np.abs(dm - ref)) < 1e-12 * np.max(np.abs(ref))
    shear_ref = np.array([[q44 * c * c + q55 * s * s, (q55 - q44) * c * s],
                          [(q55 - q44) * c * s, q44 * s * s + q55 * c * c]])
    assert np.max(np.abs(ds - shear_ref)) < 1e-14 * np.max(np.abs(shear_ref))


def test_material_validation():
    with pytest.raises(DomainError):
        MaterialProps(E_L=-1.0, E_T=1.0, nu_LT=0.3, G_LT=1.0, G_TN=1.0, G_LN=1.0)
    with pytest.raises(DomainError):
        MaterialProps(E_L=1.0, E_T=1.0, nu_LT=1.5, G_LT=1.0, G_TN=1.0, G_LN=1.0)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------


def test_hole_mesh_valid_and_edges_populated():
    mesh = hole_plate_mesh(1.0, 1.0, 0.25, 6, 24)
    assert mesh.n_elements == 6 * 24
    assert mesh.nodes_on_line(0, 0.0).size > 1
    assert mesh.nodes_on_line(0, 1.0).size > 1


def test_mesh_validation_errors():
    with pytest.raises(MeshError):
        hole_plate_mesh(1.0, 1.0, 0.6, 4, 16)  # hole too big
    with pytest.raises(MeshError):
        hole_plate_mesh(1.0, 1.0, 0.25, 4, 18)  # not a multiple of 4
    with pytest.raises(MeshError, match="Jacobian"):
        Mesh(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
             np.array([[0, 1, 3, 2]]))  # crossed quad


# ---------------------------------------------------------------------------
# element stiffness
# ---------------------------------------------------------------------------


def _single_element_model(plies=None, mat=None, nodes=None):
    nodes = np.array([[0.0, 0.0], [1.1, 0.1], [1.0, 1.2], [-0.1, 0.9]]) \
        if nodes is None else nodes
    mesh = Mesh(nodes, np.array([[0, 1, 2, 3]]))
    return LaminateModel(mesh, plies or const_angle_plies(),
                         mat or demo_material())


def test_element_stiffness_deterministic():
    m = _single_element_model()
    k1 = m.element_stiffness(0, np.zeros(4))
    k2 = m.element_stiffness(0, np.zeros(4))
    assert np.array_equal(k1, k2)


def test_element_stiffness_symmetric():
    m = _single_element_model(plies=PlyStack(
        (0.001, 0.002, 0.003),
        tuple(PathFunction("quadratic", c) for c in HOLE_PATHS[:3])))
    k = m.element_stiffness(0, np.array([0.01, -0.02, 0.005]))
    assert np.max(np.abs(k - k.T)) < 1e-12 * np.max(np.abs(k))


def _plane_stress_quad_oracle(nodes, d_mat, thickness):
    """Independent 2x2-Gauss plane-stress quad stiffness (8x8, u/v only)."""
    g = 1.0 / math.sqrt(3.0)
    k = np.zeros((8, 8))
    for xi, eta in ((-g, -g), (g, -g), (g, g), (-g, g)):
        dxi = 0.25 * np.array([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
        deta = 0.25 * np.array([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
        jac = np.array([[dxi @ nodes[:, 0], dxi @ nodes[:, 1]],
                        [deta @ nodes[:, 0], deta @ nodes[:, 1]]])
        det = np.linalg.det(jac)
        dn = np.linalg.inv(jac) @ np.vstack([dxi, deta])
        b = np.zeros((3, 8))
        b[0, 0::2] = dn[0]
        b[1, 1::2] = dn[1]
        b[2, 0::2] = dn[1]
        b[2, 1::2] = dn[0]
        k += thickness * b.T @ d_mat @ b * det
    return k


def test_membrane_block_matches_isotropic_plane_stress_oracle():
    e_mod, nu = 10.0, 0.3
    mat = MaterialProps(E_L=e_mod, E_T=e_mod, nu_LT=nu,
                        G_LT=e_mod / (2 * (1 + nu)), G_TN=1.0, G_LN=1.0)
    nodes = np.array([[0.0, 0.0], [1.1, 0.1], [1.0, 1.2], [-0.1, 0.9]])
    plies = const_angle_plies(n=2, a1=0.37, thickness=0.004)
    m = _single_element_model(plies=plies, mat=mat, nodes=nodes)
    k = m.element_stiffness(0, np.zeros(2))
    d_iso = e_mod / (1 - nu * nu) * np.array(
        [[1.0, nu, 0.0], [nu, 1.0, 0.0], [0.0, 0.0, (1 - nu) / 2]])
    ref = _plane_stress_quad_oracle(nodes, d_iso, 0.008)
    idx = np.array([0, 1, 5, 6, 10, 11, 15, 16])
    assert np.max(np.abs(k[np.ix_(idx, idx)] - ref)) < 1e-11 * np.max(np.abs(ref))


def test_balanced_layup_parity_under_angle_flip():
    # flipping the sign of every ply angle permutes equal plies, so K is
    # reproduced exactly when both the thickness and the z^3 bending weights
    # are sign-balanced (alternating +-theta stack); in the symmetric
    # (+,-,-,+) stack only the membrane/shear blocks keep that parity, the
    # bending-twist coupling flips sign with the angles (nonzero D16 effect)
    mk = lambda a1: PathFunction("quadratic", (a1, 0.0, 0.0, 0.0))
    a1 = 0.8
    assert fiber_angle(mk(-a1), 0.3, 0.4) == pytest.approx(
        -fiber_angle(mk(a1), 0.3, 0.4), abs=1e-14)
    mesh = rect_mesh(1.0, 1.0, 2, 2)
    mat = demo_material()

    def stiff(signs):
        plies = PlyStack((0.002,) * 4, tuple(mk(s * a1) for s in signs))
        return LaminateModel(mesh, plies, mat).assemble(np.zeros(4)).toarray()

    k_alt = stiff((1, -1, 1, -1))
    k_alt_flip = stiff((-1, 1, -1, 1))
    assert np.max(np.abs(k_alt - k_alt_flip)) < 1e-11 * np.abs(k_alt).max()
    k_sym = stiff((1, -1, -1, 1))
    k_sym_flip = stiff((-1, 1, 1, -1))
    um = np.array([5 * n + k for n in range(mesh.n_nodes) for k in (0, 1)])
    diff_m = np.abs(k_sym - k_sym_flip)[np.ix_(um, um)]
    assert diff_m.max() < 1e-11 * np.abs(k_sym).max()


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def test_free_free_zero_energy_mode_counts():
    # 1-point shear integration admits two element-level spurious modes
    # (w hourglass and the linear twist field theta = c*(eta, -xi)) on top of
    # the 6 rigid modes; on a mesh only the alternating w pattern survives.
    m1 = _single_element_model()
    k1 = m1.assemble(np.zeros(4)).toarray()
    w1 = np.linalg.eigvalsh(k1)
    assert np.sum(np.abs(w1) < 1e-8 * np.max(np.abs(w1))) == 8
    mesh = rect_mesh(1.0, 1.0, 3, 3)
    m2 = LaminateModel(mesh, const_angle_plies(), demo_material())
    k2 = m2.assemble(np.zeros(4)).toarray()
    w2 = np.linalg.eigvalsh(k2)
    assert np.sum(np.abs(w2) < 1e-8 * np.max(np.abs(w2))) == 7


def test_assembled_matrix_reproducible_bitwise():
    mesh = hole_plate_mesh(1.0, 1.0, 0.25, 4, 16)
    plies = PlyStack((0.00125,) * 8,
                     tuple(PathFunction("quadratic", c) for c in HOLE_PATHS))
    m = LaminateModel(mesh, plies, demo_material())
    a = m.assemble(np.zeros(8))
    b = m.assemble(np.zeros(8))
    assert np.array_equal(a.data, b.data)
    assert np.array_equal(a.indices, b.indices)


def test_thickness_scaling_laws():
    mk = lambda t: PlyStack((t,) * 4, (PathFunction("quadratic",
                                                    (0.4, 0.0, 0.0, 0.0)),) * 4)
    mesh = rect_mesh(1.0, 0.5, 2, 2)
    mat = demo_material()
    m1 = LaminateModel(mesh, mk(0.0025), mat)
    m2 = LaminateModel(mesh, mk(0.005), mat)
    from vsuq.backend import kernels
    t1 = np.asarray(m1.plies.thicknesses)
    t2 = np.asarray(m2.plies.thicknesses)
    am1, ab1, as1 = kernels.laminate_abd(m1.theta_nominal, t1,
                                         m1.plies.bending_weights(),
                                         mat.d_membrane(), mat.d_shear())
    am2, ab2, as2 = kernels.laminate_abd(m2.theta_nominal, t2,
                                         m2.plies.bending_weights(),
                                         mat.d_membrane(), mat.d_shear())
    assert np.allclose(am2, 2.0 * am1, rtol=1e-13)
    assert np.allclose(as2, 2.0 * as1, rtol=1e-13)
    assert np.allclose(ab2, 8.0 * ab1, rtol=1e-13)
    # pure blocks of the assembled matrix follow the same laws
    k1 = m1.assemble(np.zeros(4)).toarray()
    k2 = m2.assemble(np.zeros(4)).toarray()
    um = np.array([5 * n + k for n in range(mesh.n_nodes) for k in (0, 1)])
    wm = np.array([5 * n + 2 for n in range(mesh.n_nodes)])
    assert np.allclose(k2[np.ix_(um, um)], 2.0 * k1[np.ix_(um, um)], rtol=1e-12)
    assert np.allclose(k2[np.ix_(wm, wm)], 2.0 * k1[np.ix_(wm, wm)], rtol=1e-12)


def test_constrained_stiffness_positive_definite():
    mesh = hole_plate_mesh(1.0, 1.0, 0.25, 4, 16)
    plies = PlyStack((0.00125,) * 8,
                     tuple(PathFunction("quadratic", c) for c in HOLE_PATHS))
    m = LaminateModel(mesh, plies, demo_material())
    m.clamp_edge("left")
    kff, _ = m.reduce(m.assemble(np.zeros(8)))
    np.linalg.cholesky(kff.toarray())  # raises if not PD


# ---------------------------------------------------------------------------
# solves
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def hole_model():
    import json
    from pathlib import Path

    cfg = json.loads((Path(__file__).parent.parent / "configs"
                      / "hole_plate.json").read_text())
    cfg["geometry"]["rings"] = 5
    cfg["geometry"]["segments"] = 20
    return model_from_config(cfg)


def test_zero_load_zero_displacement(hole_model):
    hole_model.load[:] = 0.0
    try:
        r = hole_model.solve_full(np.zeros(8))
        assert np.max(np.abs(r)) == 0.0
    finally:
        hole_model.load[:] = 0.0
        hole_model.add_edge_traction("right", "x", 2.0)


def test_load_linearity(hole_model):
    r1 = hole_model.solve_full(np.zeros(8))
    hole_model.load[:] *= 2.0
    try:
        r2 = hole_model.solve_full(np.zeros(8))
    finally:
        hole_model.load[:] /= 2.0
    assert np.allclose(r2, 2.0 * r1, rtol=1e-12, atol=0.0)


def test_energy_identity(hole_model):
    eps = np.radians([0.1, -0.2, 0.15, 0.02, -0.1, 0.05, 0.2, -0.05])
    r = hole_model.solve_full(eps)
    k = hole_model.assemble(eps)
    num = float(r @ (k @ r))
    den = float(r @ hole_model.load)
    assert abs(num - den) / abs(den) < 1e-9


def test_membrane_patch_test_distorted_mesh():
    nodes = np.array([[0, 0], [0.55, 0], [1, 0], [0, 0.45], [0.52, 0.61],
                      [1, 0.55], [0, 1], [0.48, 1], [1, 1]], dtype=float)
    elems = np.array([[0, 1, 4, 3], [1, 2, 5, 4], [3, 4, 7, 6], [4, 5, 8, 7]])
    mesh = Mesh(nodes, elems)
    for a1 in (0.0, 0.37, -1.2, 4.0):
        m = LaminateModel(mesh, const_angle_plies(a1=a1), demo_material())
        coef = (0.003, 0.001, -0.002, 0.004, 0.0015, -0.001)
        ufield = lambda x, y: coef[0] + coef[1] * x + coef[2] * y
        vfield = lambda x, y: coef[3] + coef[4] * x + coef[5] * y
        for n in range(9):
            for k in (2, 3, 4):
                m.prescribe(5 * n + k, 0.0)
        for n in (0, 1, 2, 3, 5, 6, 7, 8):
            m.prescribe(5 * n + 0, ufield(*nodes[n]))
            m.prescribe(5 * n + 1, vfield(*nodes[n]))
        r = m.solve_full(np.zeros(4))
        assert r[5 * 4 + 0] == pytest.approx(ufield(*nodes[4]), abs=1e-15)
        assert r[5 * 4 + 1] == pytest.approx(vfield(*nodes[4]), abs=1e-15)


def test_mesh_convergence_clamped_strip():
    mat = demo_material()
    tips = []
    for nx, ny in ((8, 2), (16, 4), (32, 8)):
        mesh = rect_mesh(1.0, 0.25, nx, ny)
        m = LaminateModel(mesh, const_angle_plies(n=4, a1=0.5, thickness=0.01),
                          mat)
        m.clamp_edge("left")
        m.add_edge_traction("right", "y", 0.5)
        r = m.solve_full(np.zeros(4))
        tips.append(m.responses(r)[1])
    d1 = abs(tips[1] - tips[0])
    d2 = abs(tips[2] - tips[1])
    assert d2 < d1  # refinement shrinks the change
    assert d2 < 0.25 * abs(tips[2])


def test_deviation_validation(hole_model):
    with pytest.raises(DeviationError):
        hole_model.solve_full(np.zeros(5))
    with pytest.raises(DeviationError):
        hole_model.solve_full(np.full(8, np.radians(20.0)))  # above 15 deg cap


def test_config_errors():
    with pytest.raises(ConfigError):
        model_from_config({"geometry": {"kind": "sphere"}})
