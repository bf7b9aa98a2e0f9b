"""
Planner Service - Uplink CoMP rate coverage analysis and BS density planning
"""
