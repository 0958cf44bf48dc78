"""Contour-driven geodesic saliency for refining object proposal boxes."""

from .contour import ContourMap, load_contour_map, sobel_contour
from .errors import (
    ConfigError,
    DimensionMismatch,
    EmptyAfterClamp,
    EmptyBackground,
    InvalidBox,
    NoFiniteValues,
    NoGroundTruth,
    ParseError,
    SalboxError,
)
from .evaluation import (
    AnnotatedBox,
    GroundTruth,
    RecallCurve,
    average_recall,
    iou_grid,
    load_csv_annotations,
    load_voc_annotations,
    load_voc_directory,
    recall_at,
    recall_count_curve,
    recall_iou_curve,
)
from .geometry import BBox, bbox_area, bbox_iou, clamp_box
from .pipeline import (
    PipelineConfig,
    RefineOutcome,
    refine_image_proposals,
    run_eval,
    run_refine,
)
from .ranking import (
    RankParams,
    ScoredProposal,
    merge_rerank,
    nms,
    read_proposals_csv,
    saliency_score,
    write_proposals_csv,
)
from .raster import Raster, load_image, save_pgm
from .refinement import (
    RefinedProposal,
    RefineParams,
    enlarge_window,
    refine_box,
    refine_windows,
    select_background_nodes,
)
from .saliency import (
    RegionGraph,
    SaliencyMap,
    UNREACHABLE,
    build_region_graph,
    geodesic_saliency,
    normalize_saliency,
)
from .segmentation import (
    SegParams,
    SuperpixelLabeling,
    gaussian_smooth,
    segment_image,
)

__version__ = "0.1.0"
