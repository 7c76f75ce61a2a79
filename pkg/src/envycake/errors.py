"""Exception types shared by the division engines and the CLI."""


class InputError(ValueError):
    """Malformed or unsupported input (CLI exit code 2)."""


class ContradictionError(RuntimeError):
    """A correctness lemma was violated at runtime (CLI exit code 3).

    Reaching this means either a bug in the engine or a counterexample to a
    claimed theorem; it is never an expected outcome.
    """
