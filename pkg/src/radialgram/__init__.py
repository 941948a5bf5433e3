"""Length-radial positive and conditionally negative definite functions on free groups.

Word algebra for F_inf, the free real line and the direct sum of reals;
Gram certificates; synthesis of radial functions from representing measures
and recovery of those measures from moments or Laplace samples; witness
families that move positive definiteness from a group to its length semigroup.
"""

__version__ = "0.1.0"

from .words import (  # noqa: E402
    CoordVector,
    FreeWord,
    LengthValue,
    RealFreeWord,
    format_word,
    identity,
    inverse,
    left_quotient,
    lp_length,
    lp_length_pow,
    multiply,
    parse_word,
    random_word,
)
from .embedding import EmbeddingVector, classify_pair, embed, sq_distance  # noqa: E402
from .gram import GramReport, check_cnd, check_psd, group_gram, semigroup_gram  # noqa: E402
from .profiles import (  # noqa: E402
    CndProfileZ,
    DiscreteMeasure,
    Radial,
    RadialProfileZ,
    RPlusCndProfile,
    RPlusPdProfile,
    schoenberg_transform,
)
from .moments import MomentSequence, hankel_feasible, recover_laplace, recover_measure  # noqa: E402
from .transfer import FamilySpec, build_family, radial_to_semigroup, transfer_bound_check  # noqa: E402
