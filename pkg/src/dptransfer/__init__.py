"""Semantic mesh correspondence, calibrated uncertainty losses and dense
pseudo-label mining for transferring dense pose annotations across species."""
from .calibration import calibrated_ce, gaussian_nll, positive_reparam, scaled_softmax
from .classes import ClassScoreTable, rank_classes, top_n_subset
from .correspondence import VertexMap, map_distortion, match, transfer_chart_coords
from .descriptors import DescriptorField, compute_descriptors, normalize_descriptors
from .distillation import (DetectionRecord, PseudoLabelSet, build_dataset, filter_detections,
                           sample_pixels)
from .errors import (ChartError, DegeneratePartError, DisconnectedMeshError, MeshError,
                     TensorFormatError, ValidationError)
from .geodesics import DistanceField, mean_distance_to_part, single_source_distance
from .mesh import (ChartCoords, PartChart, TriMesh, connected_components, load_chart, load_mesh,
                   save_mesh)
from .tensorio import read_tensor, write_tensor

__version__ = "0.1.0"
