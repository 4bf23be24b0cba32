"""Exact minimax decision rules, conditioning checks and calibration for credal sets."""
