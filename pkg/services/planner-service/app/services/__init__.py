"""
Domain services for planner service
"""
