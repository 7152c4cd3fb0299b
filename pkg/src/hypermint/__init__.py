"""Mining MDL-optimal sets of hyper-rectangles from numerical data."""

from .dataset import (
    DataError,
    Dataset,
    DiscretizationGrid,
    DiscretizedDataset,
    discretize,
    elementary_cells,
    equal_width_grid,
    grid_from_cuts,
    import_grid,
    load_csv,
)
from .evaluation import (
    EvalReport,
    compression_ratio,
    evaluate,
    jcd,
    pairwise_cover_jaccard,
    pattern_accuracy,
    rect_jaccard,
)
from .mdl import (
    EncodingContext,
    HyperRectangle,
    LengthBreakdown,
    PatternSet,
    merge_gain,
    plugin_data_bits,
    total_bits,
    universal_int,
)
from .miner import MinerConfig, MiningResult, mine, prune
from .synth import GroundTruth, generate

__version__ = "0.1.0"

__all__ = [
    "DataError",
    "Dataset",
    "DiscretizationGrid",
    "DiscretizedDataset",
    "discretize",
    "elementary_cells",
    "equal_width_grid",
    "grid_from_cuts",
    "import_grid",
    "load_csv",
    "EvalReport",
    "compression_ratio",
    "evaluate",
    "jcd",
    "pairwise_cover_jaccard",
    "pattern_accuracy",
    "rect_jaccard",
    "EncodingContext",
    "HyperRectangle",
    "LengthBreakdown",
    "PatternSet",
    "merge_gain",
    "plugin_data_bits",
    "total_bits",
    "universal_int",
    "MinerConfig",
    "MiningResult",
    "mine",
    "prune",
    "GroundTruth",
    "generate",
]
