"""Tokenizing, sentence splitting and the stopword list shared by the
summarizer and the keyword extractor."""

import re

STOPWORDS = frozenset(
    """
    a about above after again against all also am an and any are as at be
    because been before being below between both but by can could did do does
    doing down during each few for from further had has have having he her here
    hers herself him himself his how i if in into is it its itself just me more
    most my myself no nor not now of off on once only or other our ours
    ourselves out over own same she should so some such than that the their
    theirs them themselves then there these they this those through to too
    under until up very was we were what when where which while who whom why
    will with would you your yours yourself yourselves
    """.split()
)

_TOKEN = re.compile(r"[^\W_]+(?:'[^\W_]+)*")
_SENTENCE_END = re.compile(r"(?<=[.!?])\s+|\n\s*\n")


def tokenize(text):
    """Lowercase word tokens with punctuation stripped."""
    return _TOKEN.findall(text.lower())


def split_sentences(text):
    """Split on '.', '!' or '?' followed by whitespace, and on blank lines.

    Abbreviations are not special-cased, so "U.S. troops" splits after "U.S.".
    """
    parts = (s.strip() for s in _SENTENCE_END.split(text))
    return [s for s in parts if s]
