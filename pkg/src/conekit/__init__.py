"""Exact tools for hyperbolic lattices: walls, orbits, chambers, geodesics, Picard sublattices."""

from .chambers import (Arrangement, Chamber, FaceResult, Wall, build_arrangement,
                       chamber_equivalent, cross_wall, face_orbit_count, faces, is_face,
                       locate_chamber)
from .enumeration import (EnumWindow, enum_isotropic_primitive, enum_negative_primitive,
                          enum_negative_range)
from .errors import ConeKitError, ConfigError, DomainError
from .hyperbolic import (closed_geodesic_length, cusp_clearance, density_probe, h_distance,
                         sample_ball, wall_distance)
from .io import load_lattice, load_preset, revalidate
from .lattice import (Isometry, QuadLattice, canonical_sign, divisibility, eval_form,
                      is_isometry, is_primitive, orthogonal_complement, reflection, signature,
                      square)
from .orbits import ClosurePolicy, GroupSpec, orbit_decompose, reflection_group
from .period import PicardSpec, deformation_target, is_projective_type, picard_closure

__version__ = "0.1.0"
