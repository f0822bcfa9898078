from .simplicial import SimplicialMesh, build_mesh, submesh, root_simplex_ids, root_vertex_ids, simplex_graph
from .complement import ComplementDecomposition, ComplementRegion, complement_components
from .covering import InnerCovering, inner_covering, boundary_distances
from .locate import PointLocation, locate_point, locate_points
from .grid import GridSpec, RegionGrid, rasterize, label_regions
