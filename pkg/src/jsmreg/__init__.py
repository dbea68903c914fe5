"""Rigid 2D registration with joint-saliency-map weighted mutual information."""
