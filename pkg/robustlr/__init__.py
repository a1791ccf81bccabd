"""**robustlr** computes least favorable distributions and minimax robust tests."""
