"""Article-level subject classification of scholarly publications.

Journal-level Fields-of-Research codes are transferred to articles through
their ISSN, per-metadata-channel text classifiers are trained on the result,
and a voting ensemble classifies each article.
"""

__version__ = "0.1.0"
