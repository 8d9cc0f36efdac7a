"""Services layer orchestrating training, evaluation and persistence."""
