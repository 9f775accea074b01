"""Bit error probabilities of polar codes under successive-cancellation decoding."""
