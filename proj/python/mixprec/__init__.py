"""Profile-driven mixed precision tuning over a small SSA IR."""

from ._core import (
    InstructionChangeSet,
    NumericalProfile,
    Program,
    classify_ics,
    gen_matrix,
    lu_program,
    parse,
    print_text,
    profile,
    quad_arrays,
    quad_program,
    rewrite,
    run,
    sweep,
    validate,
)

__all__ = [
    "InstructionChangeSet",
    "NumericalProfile",
    "Program",
    "classify_ics",
    "gen_matrix",
    "lu_program",
    "parse",
    "print_text",
    "profile",
    "quad_arrays",
    "quad_program",
    "rewrite",
    "run",
    "sweep",
    "validate",
]
