"""Hybrid SUSTAIN + collaborative filtering resource recommender and its baselines."""

from .corpus import Dataset, Post, SplitDataset, chronological_split, filter_unique_resources, parse_posts, sample_users
from .hybrid import HybridConfig, recommend
from .sustain import SustainParams, UserNetwork, train_user, score_candidate

__version__ = "0.1.0"

__all__ = [
    "Dataset", "Post", "SplitDataset", "parse_posts", "filter_unique_resources", "sample_users",
    "chronological_split", "SustainParams", "UserNetwork", "train_user", "score_candidate",
    "HybridConfig", "recommend",
]
