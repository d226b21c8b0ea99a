"""Skeleton activity recognition by ordered linear-patch decomposition.

A posture sequence is split into continuous maximal linear patches, each
patch is summarised by its mean posture and main direction, and sequences
are compared with an order-preserving patch-pair matching distance.
"""
from ._backend import available as available_backends, current as current_backend, use_backend
from .classifier import (EvaluationReport, Prediction, ReferenceGallery, describe_sequence, evaluate,
                         fit, predict)
from .decompose import Cmlp, CmlpSequence, decompose
from .descriptor import SnippetDescriptor, covariance, describe, major_posture, principal_direction
from .distance import (DegenerateInputError, DescriptorSequence, Feature, Matcher, MeasureKind, ammd,
                       cmlp_distance, dtw_distance, manifold_distance, mdd, mmd_closest_pair,
                       mmd_equal_weight, mpd)
from .geometry import (ConfigError, InputError, PatchGeometry, PostureSequence, euclidean_distance,
                       geodesic_distances, nonlinearity_score, patch_geometry, sequential_graph_edges)

__version__ = "0.1.0"
