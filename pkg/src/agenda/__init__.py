"""Parliamentary-agenda toolkit: transcript parsing, day-level topic models,
policy-category aggregation and the event-effect analysis model."""

__version__ = "0.1.0"
