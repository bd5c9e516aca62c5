"""
histotest

Sample-efficient testing of k-histogram distributions: the divide / learn /
sieve tester, hard-instance generation, model selection and an experiment
harness.
"""

__version__ = "1.0.0"
