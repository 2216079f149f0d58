"""Spectra of Sturmian Schrodinger operators via periodic approximations.

The package computes exact band structures of the rational approximants of
a Kohmoto-model Hamiltonian, organises the bands into the type-A/B
inclusion tree, evaluates integrated-density-of-states gap labels, and
emits finite-depth numerical certificates that each admissible label
{n * alpha} is carried by an open spectral gap.
"""

from .bandtree import (
    BandNode,
    BandTree,
    InjectivityReport,
    InterlacingReport,
    TreeError,
    build_tree,
    injectivity_probe,
    path_enclosure,
    verify_interlacing,
)
from .contfrac import (
    DEFAULT_BUDGET,
    ContinuedFraction,
    Convergent,
    Enclosure,
    PrecisionBudget,
    QuotientError,
    alpha_value,
    beta_value,
    convergents,
    frac_n_alpha,
    ostrowski_digits,
    rational_grid,
)
from .gaplabels import (
    CertificationError,
    Gap,
    GapCertificate,
    certify_gap,
    gaps_of_level,
    ids_value,
    negative_coupling_transfer,
    series_label,
    two_path_witness,
)
from .operator import (
    PotentialWord,
    TransferMatrixProduct,
    dirichlet_eig_count,
    discriminant,
    periodic_matrices,
    potential_word,
    transfer_product,
)
from .spectrum import (
    MAX_Q_DEFAULT,
    Band,
    NestingReport,
    SigmaSet,
    SpectrumApprox,
    SpectrumError,
    check_nesting,
    compute_bands,
    hausdorff_distance,
    sigma_set,
    total_measure,
)

__version__ = "0.1.0"
