from .materials import MaterialProps, ply_constitutive  # noqa: F401
from .mesh import Mesh, hole_plate_mesh, rect_mesh  # noqa: F401
from .model import LaminateModel, PlyStack, model_from_config  # noqa: F401
from .paths import PathFunction, fiber_angle, path_gradient  # noqa: F401
