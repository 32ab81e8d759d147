"""Exception hierarchy shared by the library and the CLI.

Every error the toolkit raises deliberately derives from :class:`ToolError`
and carries the process exit code the CLI maps it to:

* exit code 2 -- the input itself is unusable (malformed file, non-finite
  values, too many nodes, too few samples),
* exit code 3 -- the input parsed fine but the numbers are degenerate
  (constant nodes under the ``error`` policy, no cavities to summarize,
  a singular regression fit),
* exit code 4 -- the evaluation protocol cannot be run as requested
  (missing group labels, not enough records for the requested split).
"""

from __future__ import annotations


class ToolError(Exception):
    """Base class for all deliberate failures; ``exit_code`` is the CLI status."""

    exit_code = 1


class InputError(ToolError):
    """The input data cannot be used at all."""

    exit_code = 2


class MalformedFileError(InputError):
    """A file does not parse as the format it is supposed to be."""


class NonFiniteValueError(InputError):
    """An input value is NaN or infinite where a finite number is required."""


class NodeCapError(InputError):
    """More nodes than the supported maximum (10,000)."""


class TooFewSamplesError(InputError):
    """Fewer than two activation samples; correlation is undefined."""


class NumericError(ToolError):
    """Parsed fine, but the numbers do not support the computation."""

    exit_code = 3


class DegenerateDataError(NumericError):
    """Data is degenerate (e.g. constant nodes) under the active policy."""


class NoCavitiesError(NumericError):
    """The persistence diagram has no bars left to average after filtering."""


class SingularFitError(NumericError):
    """The regression design matrix is rank deficient."""


class ProtocolError(ToolError):
    """An evaluation protocol was asked to do something it cannot."""

    exit_code = 4
