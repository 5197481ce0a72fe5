"""Response parsing, voting and batch runs."""

from .config import RunConfig, RunConfigError, SelfConsistency, build_config, load_run_config  # noqa: F401
from .runner import RunRecord, Runner, Sample, bisc_run, load_records, run, write_records  # noqa: F401
from .verdict import ConfidenceSource, ParsedVerdict, parse_response, parse_ternary, parse_verdict  # noqa: F401
from .vote import EmptyVotes, vote  # noqa: F401
