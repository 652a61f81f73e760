"""Synthetic temporal graphs, labelled instances, splits and metrics."""
from .generators import (GENERATORS, TemporalEdgeList, generate, generate_er,
                         generate_preferential_attachment, generate_ws)
from .instances import (LABEL_HEADER, TARGETS, LabeledInstance, build_instances, instances_from_labels,
                        labels_of, read_instance_csv, read_label_file, scale_label, write_instance_csv)
from .metrics import mse
from .split import (SPLITS, SplitOrderError, SplitSpec, assign_origins, downsample_zero_growth,
                    temporal_split, verify_split)
from .seeding import STAGES, stage_seed

__all__ = [
    "GENERATORS", "TemporalEdgeList", "generate", "generate_er", "generate_preferential_attachment",
    "generate_ws", "LABEL_HEADER", "TARGETS", "LabeledInstance", "build_instances", "instances_from_labels",
    "labels_of", "read_instance_csv", "read_label_file", "scale_label", "write_instance_csv", "mse",
    "SPLITS", "SplitOrderError", "SplitSpec", "assign_origins", "downsample_zero_growth",
    "temporal_split", "verify_split", "STAGES", "stage_seed",
]
