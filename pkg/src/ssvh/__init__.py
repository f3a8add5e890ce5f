"""Semi-supervised vertex hunting and its network / topic-model applications."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DistortionVector,
    LabeledCloud,
    NoiseSpec,
    VertexMatrix,
    WeightMatrix,
    distort_to_weights,
    matched_loss,
    normalize_eigvec,
    orthocomp_projector,
    weights_to_labels,
    weights_to_points,
)
from .engine import SsvhFit, build_m, estimate_b, sigma_alpha, ssvh  # noqa: E402
from .baselines import (  # noqa: E402
    SvsConfig,
    distance_to_simplex,
    sketched_vertex_search,
    successive_projection,
)
from .network import DcmmParams, estimate_memberships, generate_dcmm  # noqa: E402
from .topics import PlsiParams, TopicLoadings, estimate_topics, generate_plsi  # noqa: E402

__all__ = [
    "DistortionVector",
    "LabeledCloud",
    "NoiseSpec",
    "VertexMatrix",
    "WeightMatrix",
    "distort_to_weights",
    "matched_loss",
    "normalize_eigvec",
    "orthocomp_projector",
    "weights_to_labels",
    "weights_to_points",
    "SsvhFit",
    "build_m",
    "estimate_b",
    "sigma_alpha",
    "ssvh",
    "SvsConfig",
    "distance_to_simplex",
    "sketched_vertex_search",
    "successive_projection",
    "DcmmParams",
    "estimate_memberships",
    "generate_dcmm",
    "PlsiParams",
    "TopicLoadings",
    "estimate_topics",
    "generate_plsi",
]
