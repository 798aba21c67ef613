"""Cooperative MSR erasure codes over GF(2^m): construction, encoding and multi-node repair."""
from .gf import GF2m, create_field, primitive_element
from .construction import (
    CodeDescriptor,
    CodeParams,
    build_descriptor,
    check_flr,
    derive_params,
    f_det,
    kernel_map,
    kernel_matrix,
    load_descriptor,
    pairing_polynomials,
    parity_submatrix,
    save_descriptor,
    select_parameters,
    verify_mds,
)
from .codec import decode_erasures, encode_systematic, syndrome
from .repair import (
    BandwidthLedger,
    cooperative_repair,
    cut_set_bound,
    helper_compute,
    plan_repair,
    q_matrix,
    repair_matrix,
    row_selector,
    selection_matrix,
    small_code_matrices,
    step1_solve,
    step2_combine,
    verify_repair_identities,
)

__all__ = [
    "GF2m", "create_field", "primitive_element",
    "CodeDescriptor", "CodeParams", "build_descriptor", "check_flr", "derive_params", "f_det",
    "kernel_map", "kernel_matrix", "load_descriptor", "pairing_polynomials", "parity_submatrix",
    "save_descriptor", "select_parameters", "verify_mds",
    "decode_erasures", "encode_systematic", "syndrome",
    "BandwidthLedger", "cooperative_repair", "cut_set_bound", "helper_compute", "plan_repair",
    "q_matrix", "repair_matrix", "row_selector", "selection_matrix", "small_code_matrices",
    "step1_solve", "step2_combine", "verify_repair_identities",
]
