"""Harness for evaluating language models as logic code simulators."""
