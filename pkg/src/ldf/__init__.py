"""Label decoupling for salient object detection: body/detail labels,
losses, evaluation metrics, error-distance analysis and a toy two-branch
network trained on synthetic scenes."""
from .decouple import DecoupledLabels, decouple, decouple_dataset, normalize_field
from .distance import EmptyBackground, NoEdge, distance_to_edge, edt, edt_bruteforce
from .errdist import aggregate_hists, error_distance_hist, mae_edge_split
from .image import DimensionMismatch, binarize, load_gray, save_gray
from .losses import bce, iou_loss, iteration_loss, total_loss
from .metrics import e_measure, evaluate_dataset, mae, mean_f, pr_curve

__version__ = "0.1.0"
