"""Semi-supervised fake news detection over WMD document graphs.

Pipeline: CSV news corpora are cleaned and tokenized, embedded with
pre-trained GloVe vectors, linked into a k-nearest-neighbour similarity
graph under Word Mover's Distance, and classified transductively by a
graph convolutional network trained on a partial label mask.
"""

__version__ = "0.1.0"
