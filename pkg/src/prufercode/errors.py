"""Exception types shared across the package."""


class PruferCodeError(Exception):
    """Base class for every error raised by this package."""


# --- tree ingestion ---------------------------------------------------------

class MalformedDocument(PruferCodeError):
    """Input bytes are not valid AST-JSON (syntax or schema violation)."""


class NotATree(PruferCodeError):
    """Node graph is not a tree: cycle, shared child, or orphan node."""


class TooSmall(PruferCodeError):
    """Tree has fewer than two nodes."""


class IdOutOfRange(PruferCodeError):
    """Node id outside 1..n."""


# --- codec ------------------------------------------------------------------

class InvalidCode(PruferCodeError):
    """Prufer code violates its structural invariants."""


class CodeMismatch(PruferCodeError):
    """Prufer code was not derived from the tree it is paired with."""


# --- corpus pipeline --------------------------------------------------------

class TooFewExamples(PruferCodeError):
    """Corpus too small to split."""


class EmptyInput(PruferCodeError):
    """Operation requires at least one element."""


# --- metrics ----------------------------------------------------------------

class EmptyReference(PruferCodeError):
    """Reference token list is empty."""


class LengthMismatch(PruferCodeError):
    """Parallel corpora differ in length."""


# --- model ------------------------------------------------------------------

class DimensionMismatch(PruferCodeError):
    """Tensor shapes are inconsistent with the model configuration."""


class EmptyEncoderStates(PruferCodeError):
    """Attention requires at least one encoder state."""


class EmptyCorpus(PruferCodeError):
    """Training requires at least one example."""
