"""costlens: cost-based decision rules for semantic-segmentation softmax
fields, and the machinery to measure their perceptual consequences."""

__version__ = "0.1.0"

from .catalog import (ClassCatalog, PriorVector, aggregate_of,
                      builtin_cityscapes_catalog, class_frequencies)
from .costspace import (AggregateCostMatrix, BarycentricPoint, CostMatrix,
                        altruistic_matrix, barycentric_combination,
                        egoistic_matrix, expand_aggregate_matrix,
                        inverse_prior_cost_matrix, robotistic_matrix,
                        symmetric_cost_matrix, thresholding_cost_matrix,
                        validate_value_space)
from .decision import decide, decide_bayes, decide_ml, expected_cost_map
from .errors import CostlensError, DataFormatError, ValidationError
from .estimators import BayesDecider, CostSensitiveDecider, MaximumLikelihoodDecider
from .evaluation import (PixelCounts, Segment, SegmentReport, connected_components,
                         mean_iou, pixel_metrics, segment_report)
from .fields import (LabelField, Mask, ProbabilityField, SceneBundle,
                     load_dataset, load_label_field, load_mask,
                     load_probability_field, save_label_field, save_mask,
                     save_probability_field)
from .geography import (PriorField, RoiMap, derive_roi, prior_field, roi_mask)
from .sweep import (MetricSurface, SimplexGrid, evaluate_surface, render_heatmap,
                    simplex_grid)
from .synth import SceneSpec, generate_scene, generate_suite, random_scene_spec

__all__ = [name for name in dir() if not name.startswith("_")]
