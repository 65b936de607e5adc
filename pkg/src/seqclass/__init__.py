"""Binary text-sequence classification with word embeddings and an LSTM."""

__version__ = "0.1.0"
