"""Semantic labelling of outdoor scenes.

Images are split into homogeneous regions by graph-based color segmentation;
each region is described by fuzzy bag-of-visual-words weights over SIFT
descriptors plus RGB mean and variance, and labelled sky, tree, road, grass
or building by a Gaussian naive Bayes classifier.
"""

from .classifier import GaussianNbModel, fit, log_posterior_scores, predict
from .core import ClassId, Region, RgbImage, SegmentMap, connected_components, extract_regions
from .keypoints import Keypoint, assign_keypoints, detect_and_describe
from .model_store import ModelFile, load_model, save_model
from .segmentation import SegParams, segment_image
from .signature import Signature, SignatureConfig, fuzzy_memberships, region_signature
from .vocabulary import Vocabulary, train_vocabulary

__version__ = "0.1.0"
