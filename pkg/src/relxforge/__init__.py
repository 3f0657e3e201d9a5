"""relxforge: distantly-supervised multilingual relation corpora and
cross-lingual relation classification at desk scale."""

__version__ = "0.1.0"
