from .classification import (
    cb,
    cld,
    classification_profile,
    dcp,
    density,
    f1_frac,
    kdn,
    lsc,
    lsr,
    n1,
    n2,
    tree_depth,
    usefulness,
)
from .regression import CfeTrace, cfe, hb, le, regression_profile, s1, s2, s3

__all__ = [
    "CfeTrace",
    "cb",
    "cfe",
    "classification_profile",
    "cld",
    "dcp",
    "density",
    "f1_frac",
    "hb",
    "kdn",
    "le",
    "lsc",
    "lsr",
    "n1",
    "n2",
    "regression_profile",
    "s1",
    "s2",
    "s3",
    "tree_depth",
    "usefulness",
]
