"""
Shared common utilities for CoMPlan
"""
