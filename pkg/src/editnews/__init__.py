"""Turn a stream of encyclopedia page edits into ranked, summarized news items."""

__version__ = "0.1.0"
